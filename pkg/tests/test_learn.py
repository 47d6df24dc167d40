import numpy as np
import pytest

from stochspec.assign import ackermann_gain
from stochspec.errors import IndexSearchExhausted, SpecInvalid
from stochspec.learn import (
    HARMONIC,
    LearnConfig,
    LearnerState,
    Schedule,
    advance_index,
    check_probe_family,
    coeffs_of_observation,
    is_nonsingular,
    probe_family,
    probe_round,
    run_learning,
    sa_step,
    update_average,
)
from stochspec.model import AssignmentSpec, PlantParams
from stochspec.numerics import char_poly
from stochspec.plant import ContinuousPlant, DiscretePlant

from oracles import EX1_ALPHA, EX1_F, EX1_H, EX1_KV, EX1_L, EX1_LAMBDAS

EX1 = PlantParams(EX1_H, EX1_L, EX1_F)
EX1_G = EX1_H + EX1_ALPHA * EX1_L
EX2 = PlantParams(21.6, 24.0, 1.0)


def _jacobian(G, F):
    n = G.shape[0]
    a0 = char_poly(G)
    return np.array([char_poly(G + F @ e[None, :]) - a0 for e in np.eye(n)])


def test_probe_family_examples():
    np.testing.assert_array_equal(probe_family(1), [[0.0], [1.0]])
    np.testing.assert_array_equal(probe_family(2), [[0, 0], [1, 0], [1, 1]])
    np.testing.assert_array_equal(probe_family(3), [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]])
    np.testing.assert_array_equal(np.diff(probe_family(4), axis=0), np.eye(4))


def test_check_probe_family():
    check_probe_family(probe_family(3))
    with pytest.raises(ValueError):
        check_probe_family([[0, 0], [1, 0], [2, 0]])
    with pytest.raises(ValueError):
        check_probe_family([[1, 0], [1, 0], [1, 1]])


def test_coeffs_of_observation():
    np.testing.assert_array_equal(coeffs_of_observation(np.diag([2.0, 3.0])), [-5.0, 6.0])
    np.testing.assert_array_equal(coeffs_of_observation(np.zeros((3, 3))), [0.0, 0.0, 0.0])
    obs = DiscretePlant(PlantParams(0.0, 24.0, 1.0), delta=0.0).observe_X1(1.0, [6.0])
    np.testing.assert_allclose(coeffs_of_observation(obs), [-30.0])


def test_coefficient_map_is_affine():
    rng = np.random.default_rng(31)
    for _ in range(10):
        K1, K2 = rng.normal(size=3), rng.normal(size=3)
        a = lambda K: char_poly(EX1_G + EX1_F @ K[None, :])
        np.testing.assert_allclose(a(K1) + a(K2) - 2 * a((K1 + K2) / 2), 0.0, atol=1e-10)


def test_probe_round_scalar():
    plant = DiscretePlant(PlantParams(24.0, 0.0, 1.0), delta=0.0)
    np.testing.assert_allclose(probe_round(plant, 0.0, probe_family(1)), [[-1.0]])


def test_probe_round_noiseless_is_jacobian():
    plant = DiscretePlant(EX1, delta=0.0)
    A = probe_round(plant, EX1_ALPHA, probe_family(3))
    np.testing.assert_allclose(A, _jacobian(EX1_G, EX1_F), atol=1e-10)


def test_probe_round_noisy_mean():
    rng_rounds = 10_000
    plant = DiscretePlant(EX1, delta=0.01, seed=8)
    fam = probe_family(3)
    rounds = np.array([probe_round(plant, EX1_ALPHA, fam) for _ in range(rng_rounds)])
    J = _jacobian(EX1_G, EX1_F)
    sem = rounds.std(axis=0, ddof=1) / np.sqrt(rng_rounds)
    assert np.all(np.abs(rounds.mean(axis=0) - J) < 5 * sem + 1e-12)


def test_update_average():
    A1, A2 = np.array([[1.0, 2], [3, 4]]), np.array([[3.0, 0], [1, 2]])
    np.testing.assert_array_equal(update_average(np.zeros((2, 2)), A1, 0), A1)
    np.testing.assert_array_equal(update_average(A1, A2, 1), (A1 + A2) / 2)
    C = np.zeros((2, 2))
    for j in range(5):
        C = update_average(C, A1, j)
    np.testing.assert_allclose(C, A1)


def test_is_nonsingular():
    assert is_nonsingular(np.array([[-1.0]]))
    assert not is_nonsingular(np.zeros((2, 2)))
    assert not is_nonsingular(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_advance_index_scalar():
    plant = DiscretePlant(PlantParams(24.0, 0.0, 1.0), delta=0.0)
    state = advance_index(LearnerState(1), plant, 0.0, probe_family(1))
    assert state.J == 1 and state.j == 1
    np.testing.assert_allclose(state.C, [[-1.0]])
    state = advance_index(state, plant, 0.0, probe_family(1))
    assert state.J == 2


def test_advance_index_exhausted():
    plant = DiscretePlant(PlantParams(np.eye(2), np.zeros((2, 2)), [1.0, 0.0]), delta=0.0)
    duplicated = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(IndexSearchExhausted):
        advance_index(LearnerState(2), plant, 0.0, duplicated, cap=5)


def test_advance_index_example1_noisy():
    plant = DiscretePlant(EX1, delta=0.01, seed=9)
    state = advance_index(LearnerState(3), plant, EX1_ALPHA, probe_family(3))
    assert state.J >= 1
    # one noisy round: entries within a few noise sds of the exact Jacobian
    assert np.abs(state.C - _jacobian(EX1_G, EX1_F)).max() < 1.0


def test_sa_step_examples():
    K = np.array([1.0, 2.0])
    C = np.array([[2.0, 1.0], [0.0, 1.0]])
    np.testing.assert_array_equal(sa_step(K, 3, [1.0, 1.0], [1.0, 1.0], C), K)
    np.testing.assert_array_equal(sa_step(K, 3, [5.0, 1.0], [1.0, 1.0], C, beta=0.0), K)
    # scalar: K = 0, beta = 1, a_obs - a_target = -6, C = [-1] -> K' = 0 - (-6)(-1) = -6
    np.testing.assert_allclose(sa_step([0.0], 1, [-36.0], [-30.0], [[-1.0]], beta=1.0), [-6.0])
    np.testing.assert_allclose(sa_step([0.0], 1, [-36.0], [-30.0], [[-1.0]], beta=1.0, direction="direct"),
                               [-6.0])
    # exact Example 2 coefficients from K = 0: one unit step lands on 6
    np.testing.assert_allclose(sa_step([0.0], 1, [-24.0], [-30.0], [[-1.0]], beta=1.0), [6.0])


def test_sa_recursion_scalar_contracts():
    # exact scalar recursion with beta(s) = 1/s: a(K) = -(24 + K), target -30
    K = np.array([0.0])
    for s in range(1, 200):
        K = sa_step(K, s, [-(24.0 + K[0])], [-30.0], [[-1.0]], beta=HARMONIC)
    assert abs(K[0] - 6.0) < 1e-12


def test_sa_fixed_point_is_ackermann_gain():
    J = _jacobian(EX1_G, EX1_F)
    a_target = np.array([-5.0, 8.0, -6.0])
    K = sa_step(EX1_KV, 1, char_poly(EX1_G + EX1_F @ EX1_KV[None, :]), a_target, J)
    np.testing.assert_allclose(K, EX1_KV, atol=1e-10)


def test_schedules():
    HARMONIC.check_step_size()
    Schedule().check_bound()
    assert Schedule(offset=100)(3) == 103
    with pytest.raises(SpecInvalid):
        Schedule(scale=1, exponent=-0.4).check_step_size()
    with pytest.raises(SpecInvalid):
        Schedule(scale=1, exponent=0).check_bound()
    s = np.arange(1, 100_001)
    assert np.sum(HARMONIC(s) ** 2) < np.pi ** 2 / 6
    assert Schedule.from_dict(HARMONIC.to_dict()) == HARMONIC


def test_learn_config_validation():
    with pytest.raises(SpecInvalid):
        LearnConfig(eps=0).validate()
    with pytest.raises(SpecInvalid):
        LearnConfig(direction="sideways").validate()


def test_noiseless_discrete_exact():
    plant = DiscretePlant(EX1, delta=0.0)
    spec = AssignmentSpec("discrete", EX1_ALPHA, EX1_LAMBDAS)
    rep = run_learning(plant, spec, LearnConfig(bound=Schedule(offset=100)))
    assert rep.converged and rep.p_final == 0 and rep.truncations == 0
    assert np.abs(rep.gain - EX1_KV).max() < 1e-8
    assert rep.trace[-1].delta_norm < 1e-8


def test_noiseless_continuous_exact():
    plant = ContinuousPlant(EX2, dt=0.1)
    rep = run_learning(plant, AssignmentSpec("continuous", 0.0, [30.0]),
                       LearnConfig(bound=Schedule(offset=100)))
    assert rep.converged and rep.p_final == 0
    assert abs(rep.gain[0] - ackermann_gain([[21.6]], [1.0], [30.0])[0]) < 1e-8


def test_truncation_soundness_and_monotone_index():
    plant = DiscretePlant(EX1, delta=0.01, seed=12)
    records = []
    spec = AssignmentSpec("discrete", EX1_ALPHA, EX1_LAMBDAS)
    rep = run_learning(plant, spec, LearnConfig(keep_trace=False), sink=records.append)
    assert rep.converged
    bound = Schedule()
    js = {}
    for r in records:
        assert np.linalg.norm(r.K) <= bound(r.p + 1)
        js.setdefault(r.p, r.j)
    ps = sorted(js)
    assert ps == list(range(ps[0], ps[-1] + 1))
    assert all(js[a] < js[b] for a, b in zip(ps, ps[1:]))
    assert rep.truncations == rep.p_final
    assert rep.steps == len(records)


def test_learning_is_seed_reproducible():
    spec = AssignmentSpec("continuous", 0.1, [30.0])
    a = run_learning(ContinuousPlant(EX2, 0.1, seed=5), spec)
    b = run_learning(ContinuousPlant(EX2, 0.1, seed=5), spec)
    assert a.gain.tolist() == b.gain.tolist() and a.observations == b.observations


def test_learning_reports_cap():
    spec = AssignmentSpec("continuous", 0.1, [30.0])
    rep = run_learning(ContinuousPlant(EX2, 0.1, seed=5), spec, LearnConfig(p_max=2, s_max=3))
    assert not rep.converged and "p_max" in rep.reason


def test_learning_rejects_size_mismatch():
    with pytest.raises(SpecInvalid):
        run_learning(ContinuousPlant(EX2, 0.1), AssignmentSpec("continuous", 0.1, [1.0, 2.0]))
