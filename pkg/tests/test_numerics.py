import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochspec.errors import EigenFailure, NotAnEigenvalue, NotConjugateClosed
from stochspec.numerics import (
    char_poly,
    companion,
    eigenvalues,
    eigenvector,
    match_multisets,
    pair_conjugates,
    poly_from_roots,
    sort_spectrum,
)

from oracles import multiset_distance

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_char_poly_identity():
    np.testing.assert_array_equal(char_poly(np.eye(2)), [-2.0, 1.0])


def test_char_poly_diagonal():
    np.testing.assert_array_equal(char_poly(np.diag([2.0, 3.0])), [-5.0, 6.0])


def test_char_poly_integer_matrix_exact():
    A = np.array([[2.0, 1, 0], [0, 3, 1], [1, 0, 4]])
    # det(lam I - A) = lam^3 - 9 lam^2 + 26 lam - 25
    np.testing.assert_array_equal(char_poly(A), [-9.0, 26.0, -25.0])


def test_char_poly_matches_eigenvalue_product():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = rng.normal(size=(4, 4))
        expected = np.real(np.poly(np.linalg.eigvals(A)))[1:]
        np.testing.assert_allclose(char_poly(A), expected, atol=1e-8)


@given(arrays(float, (5, 5), elements=finite))
def test_char_poly_first_coefficient_is_minus_trace(A):
    a1 = char_poly(A)[0]
    assert abs(a1 + np.trace(A)) <= 1e-12 * (1 + abs(np.trace(A)))


@given(arrays(float, st.integers(1, 6), elements=finite))
def test_companion_round_trip(a):
    np.testing.assert_allclose(char_poly(companion(a)), a, rtol=1e-10, atol=1e-10 * (1 + np.abs(a).max()))


def test_companion_layout():
    C = companion([-5.0, 8.0, -6.0])
    np.testing.assert_array_equal(C, [[5.0, -8.0, 6.0], [1, 0, 0], [0, 1, 0]])


def test_poly_from_roots_examples():
    np.testing.assert_allclose(poly_from_roots([1 + 1j, 1 - 1j, 3]), [-5.0, 8.0, -6.0], atol=1e-14)
    np.testing.assert_allclose(poly_from_roots([30.0]), [-30.0])
    np.testing.assert_array_equal(poly_from_roots([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])


def test_poly_from_roots_rejects_unpaired_complex():
    with pytest.raises(NotConjugateClosed):
        poly_from_roots([1 + 1j, 2.0])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0.2, 3)), min_size=0, max_size=2),
       st.lists(st.floats(-3, 3), min_size=1, max_size=3))
def test_roots_recovered_through_companion(pairs, reals):
    roots = list(reals)
    for re, im in pairs:
        roots += [complex(re, im), complex(re, -im)]
    recovered = eigenvalues(companion(poly_from_roots(roots)))
    # well-separated roots are recovered to 1e-7; clustered ones lose digits
    gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
    if min(gaps, default=1.0) > 0.05:
        assert multiset_distance(recovered, roots) < 1e-7


def test_eigenvalues_examples():
    assert multiset_distance(eigenvalues(np.diag([1.0, 2, 3])), [1, 2, 3]) < 1e-14
    assert multiset_distance(eigenvalues(np.array([[0.0, -1], [1, 0]])), [1j, -1j]) < 1e-14
    assert multiset_distance(eigenvalues(companion([-5.0, 8, -6])), [1 + 1j, 1 - 1j, 3]) < 1e-12


def test_eigenvalues_non_finite_input():
    with pytest.raises((EigenFailure, ValueError)):
        eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_eigenvector_diagonal():
    v = eigenvector(np.diag([2.0, 3.0]), 2.0)
    np.testing.assert_allclose(np.abs(v), [1.0, 0.0], atol=1e-12)


def test_eigenvector_rotation():
    v = eigenvector(np.array([[0.0, -1], [1, 0]]), 1j)
    ref = np.array([1, -1j]) / np.sqrt(2)
    # equal up to a unit phase
    phase = np.vdot(ref, v)
    assert abs(abs(phase) - 1) < 1e-12
    np.testing.assert_allclose(v, phase * ref, atol=1e-12)


def test_eigenvector_rejects_non_eigenvalue():
    with pytest.raises(NotAnEigenvalue):
        eigenvector(np.diag([2.0, 3.0]), 2.5)


def test_pair_conjugates():
    pair_conjugates([1 + 1j, 3.0, 1 - 1j])
    with pytest.raises(NotConjugateClosed):
        pair_conjugates([1 + 1j, 1 + 1j])


def test_sort_spectrum_order():
    out = sort_spectrum([3.0, 1 + 1j, 1 - 1j, -2.0])
    np.testing.assert_array_equal(out, [-2.0, 1 - 1j, 1 + 1j, 3.0])


def test_match_multisets():
    ok, err = match_multisets([1.0, 2.0], [2.0 + 1e-9, 1.0])
    assert ok and err.max() < 1e-8
    ok, _ = match_multisets([1.0, 2.0], [1.0, 2.1])
    assert not ok
    ok, _ = match_multisets([1.0], [1.0, 2.0])
    assert not ok
