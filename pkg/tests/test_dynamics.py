import io
from fractions import Fraction

import numpy as np
import pytest

from alf import (
    DivergenceError,
    Graph,
    IntegratorConfig,
    Perturbation,
    PerturbedSystem,
    ResponseField,
    ResponseFunction,
    integrate,
    is_regular_perturbation,
    to_standard_form,
    vector_field,
)
from alf.errors import DimensionMismatchError
from alf.prng import SplitMix64

from conftest import rational_state


def _system(n, response, pert=None, eps=0):
    field = ResponseField(response)
    pert = pert if pert is not None else Perturbation.zero(n)
    return PerturbedSystem(Graph.complete(n), field, pert, eps)


# --- vector field -----------------------------------------------------------

def test_consensus_is_equilibrium(ex1_response):
    sys_ = _system(4, ex1_response)
    assert vector_field(sys_, [Fraction(7, 5)] * 4) == [0, 0, 0, 0]


def test_vector_field_hand_value():
    # -L F for K3, f = x^2, x = (1, -1, 0): L F = (1, 1, -2) by hand
    sys_ = _system(3, ResponseFunction.from_coeffs([0, 0, 1]))
    out = vector_field(sys_, [1.0, -1.0, 0.0])
    assert list(out) == [-1.0, -1.0, 2.0]


def test_vector_field_sums_to_zero_unperturbed(ex1_response):
    rng = SplitMix64(11)
    sys_ = _system(5, ex1_response)
    for _ in range(30):
        x = rational_state(rng, 5)
        assert sum(vector_field(sys_, x)) == 0


def test_vector_field_dimension_mismatch(ex1_response):
    with pytest.raises(DimensionMismatchError):
        vector_field(_system(3, ex1_response), [1.0, 2.0])


def test_random_constant_perturbation_reproducible():
    a = Perturbation.random_constant(5, seed=123, lo=0, hi=1)
    b = Perturbation.random_constant(5, seed=123, lo=0, hi=1)
    assert a.values == b.values
    assert all(0 <= v <= 1 for v in a.values)
    c = Perturbation.random_constant(5, seed=124, lo=0, hi=1)
    assert a.values != c.values


# --- standard form ----------------------------------------------------------

def test_standard_form_lift_and_project(ex1_response):
    sys_ = _system(3, ex1_response, Perturbation.constant(-1, 3), Fraction(1, 10))
    std = to_standard_form(sys_, 3)
    x = [Fraction(1, 3), Fraction(-2, 7), Fraction(4, 5)]
    fast, k = std.project(x)
    assert std.lift(fast, k) == x
    assert k == sum(x)
    # x3 = k - x1 - x2
    assert std.lift([Fraction(1), Fraction(2)], Fraction(10)) == [1, 2, 7]


def test_standard_form_k_constant_unperturbed(ex1_response):
    std = to_standard_form(_system(3, ex1_response), 2)
    ctx_rhs = std.rhs_function(__import__("alf.precision", fromlist=["ScalarContext"]).ScalarContext(16))
    rng = SplitMix64(3)
    for _ in range(20):
        y = np.array([rng.uniform(-2, 2) for _ in range(3)])
        assert abs(ctx_rhs(y)[-1]) <= 1e-14


def test_standard_form_constant_negative_perturbation(ex1_response):
    eps = Fraction(1, 10)
    sys_ = _system(3, ex1_response, Perturbation.constant(-1, 3), eps)
    std = to_standard_form(sys_, 3)
    from alf.precision import ScalarContext

    rhs = std.rhs_function(ScalarContext(16))
    for y in ([0.1, 0.2, 0.9], [-1.0, 0.5, 2.0]):
        assert rhs(np.array(y))[-1] == pytest.approx(-3 * float(eps), abs=1e-15)


def test_standard_form_field_matches_lifted_full_field(ex1_response):
    rng = SplitMix64(21)
    sys_ = _system(4, ex1_response, Perturbation.random_constant(4, 5, -1, 1), Fraction(1, 20))
    from alf.precision import ScalarContext

    for l in (1, 4):
        std = to_standard_form(sys_, l)
        rhs = std.rhs_function(ScalarContext(16))
        for _ in range(10):
            full = [rng.uniform(-1.5, 1.5) for _ in range(4)]
            fast, k = std.project(full)
            out = rhs(np.array(fast + [k]))
            ref = vector_field(sys_, np.array(full))
            kept = [j - 1 for j in std.kept]
            assert max(abs(out[i] - ref[kept[i]]) for i in range(3)) <= 1e-12


def test_is_regular_perturbation(ex1_response):
    balanced = Perturbation.constant([1, -1, 0, 0], 4)
    sys_ = _system(4, ex1_response, balanced, Fraction(1, 10))
    states = [[0.1, 0.2, 0.3, 0.4], [1.0, -1.0, 0.5, 0.25]]
    assert is_regular_perturbation(sys_, states)
    uniform = _system(4, ex1_response, Perturbation.constant(-1, 4), Fraction(1, 10))
    assert not is_regular_perturbation(uniform, states)
    zero = _system(4, ex1_response, Perturbation.zero(4), Fraction(1, 10))
    assert is_regular_perturbation(zero, states)
    with pytest.raises(ValueError):
        is_regular_perturbation(zero, [])


# --- integration ------------------------------------------------------------

def test_integrate_consensus_constant(ex1_response):
    sys_ = _system(5, ex1_response)
    traj = integrate(sys_, [0.8] * 5, (0.0, 2.0), IntegratorConfig(dt=1e-2, stride=10))
    for state in traj.states:
        assert max(abs(v - 0.8) for v in state) == 0.0


def test_integrate_conservation_short(ex1_response):
    rng = SplitMix64(1001)
    sys_ = _system(10, ex1_response)
    x0 = [rng.uniform(-1, 0) for _ in range(10)]
    traj = integrate(sys_, x0, (0.0, 5.0), IntegratorConfig(dt=1e-3, stride=100))
    k0 = traj.k_series[0]
    assert max(abs(k - k0) for k in traj.k_series) <= 1e-9 * abs(k0)


def test_linear_response_converges_to_mean_with_expm_oracle():
    sys_ = _system(3, ResponseFunction.linear())
    x0 = [0.9, -0.4, 0.2]
    traj = integrate(sys_, x0, (0.0, 20.0), IntegratorConfig(dt=1e-3, stride=1000))
    target = sum(x0) / 3
    assert max(abs(v - target) for v in traj.final_state) < 1e-8
    lap = sys_.graph.laplacian_array()
    w, vecs = np.linalg.eigh(lap)
    oracle = vecs @ np.diag(np.exp(-w * 20.0)) @ vecs.T @ np.array(x0)
    assert np.max(np.abs(np.asarray(traj.final_state, dtype=float) - oracle)) < 1e-9


def test_dp45_matches_rk4_reference():
    sys_ = _system(3, ResponseFunction.from_coeffs([0, 1, 0, Fraction(1, 4)]))
    x0 = [0.7, -0.3, 0.1]
    ref = integrate(sys_, x0, (0.0, 4.0), IntegratorConfig(method="rk4", dt=5e-4, stride=8000))
    adaptive = integrate(sys_, x0, (0.0, 4.0), IntegratorConfig(method="dp45", dt=0.05, tol=1e-10, stride=1))
    assert abs(float(adaptive.times[-1]) - 4.0) < 1e-12
    diff = max(abs(a - b) for a, b in zip(adaptive.final_state, ref.final_state))
    assert diff < 1e-8


def test_divergence_error_carries_partial_trajectory(ex1_response):
    sys_ = _system(3, ex1_response)
    with pytest.raises(DivergenceError) as err:
        integrate(sys_, [5.0, 5.0, -10.0], (0.0, 5.0), IntegratorConfig(dt=1e-3))
    traj = err.value.trajectory
    assert len(traj.times) >= 2
    assert err.value.last_time > 0


def test_gauge_invariance_along_trajectories(ex1_response):
    from alf import gauge_shift

    rng = SplitMix64(55)
    base = _system(4, ex1_response, Perturbation.constant(1, 4), Fraction(1, 20))
    shifted = PerturbedSystem(
        base.graph, gauge_shift(base.field, ResponseFunction.from_coeffs([2, 1])),
        base.perturbation, base.epsilon,
    )
    for _ in range(30):
        x = [rng.uniform(-1.5, 1.5) for _ in range(4)]
        a = vector_field(base, x)
        b = vector_field(shifted, x)
        assert max(abs(u - v) for u, v in zip(a, b)) <= 1e-12


def test_consensus_trajectory_under_uniform_perturbation(ex1_response):
    # uniform forcing keeps the consensus line invariant; the run must not
    # leave it beyond roundoff even while crossing singular stretches is avoided
    sys_ = _system(3, ex1_response, Perturbation.constant(1, 3), Fraction(1, 50))
    traj = integrate(sys_, [1.5] * 3, (0.0, 20.0), IntegratorConfig(dt=1e-3, stride=100))
    for state in traj.states:
        mean = sum(state) / 3
        assert max(abs(v - mean) for v in state) <= 1e-12


def test_trajectory_k_series_matches_recomputation(ex1_response):
    rng = SplitMix64(31)
    sys_ = _system(5, ex1_response, Perturbation.random_constant(5, 9, 0, 1), Fraction(1, 10))
    x0 = [rng.uniform(-1, 0) for _ in range(5)]
    traj = integrate(sys_, x0, (0.0, 1.0), IntegratorConfig(dt=1e-3, stride=50))
    for i in range(len(traj.times)):
        assert traj.k_series[i] == traj.recomputed_k(i)


def test_trajectory_times_strictly_increasing_and_csv_shape(ex1_response):
    sys_ = _system(3, ex1_response, Perturbation.constant(-1, 3), Fraction(1, 10))
    traj = integrate(sys_, [0.1, 0.2, 0.3], (0.0, 0.5), IntegratorConfig(dt=1e-2, stride=7))
    ts = [float(t) for t in traj.times]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    buf = io.StringIO()
    traj.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "t,x1,x2,x3,k"
    assert len(lines) == len(traj.times) + 1


def test_extended_precision_tiers_agree():
    sys_ = _system(3, ResponseFunction.from_coeffs([0, 1]))
    x0 = [0.25, -0.5, 1.0]
    t16 = integrate(sys_, x0, (0.0, 1.0), IntegratorConfig(dt=1e-2, digits=16))
    t32 = integrate(sys_, x0, (0.0, 1.0), IntegratorConfig(dt=1e-2, digits=32))
    diff = max(abs(float(a) - float(b)) for a, b in zip(t16.final_state, t32.final_state))
    assert diff < 1e-12
    assert t32.metadata["digits"] == 32


class _RoughSystem:
    """Tiny ODE-protocol object whose right-hand side defeats error control."""

    ode_dimension = 1
    k_in_state = False

    def state_labels(self):
        return ["x1"]

    def slow_value(self, y):
        return y[0]

    def rhs_function(self, ctx):
        import math

        def rhs(y):
            return np.array([1e20 * math.sin(1e30 * float(y[0]) + 1.0)])

        return rhs


def test_adaptive_step_underflow_raises_stalled():
    from alf import IntegrationStalledError

    with pytest.raises(IntegrationStalledError) as err:
        integrate(_RoughSystem(), [0.5], (0.0, 1.0), IntegratorConfig(method="dp45", dt=0.1, tol=1e-10))
    assert err.value.trajectory is not None


@pytest.mark.parametrize("method,digits", [("rk4", 16), ("rk4", 32), ("dp45", 16), ("dp45", 32)])
def test_conservation_across_integrator_precision_combinations(method, digits, ex1_response):
    rng = SplitMix64(606)
    sys_ = _system(5, ex1_response)
    x0 = [rng.uniform(-1, 0) for _ in range(5)]
    cfg = IntegratorConfig(method=method, dt=2e-3 if method == "rk4" else 0.05,
                           tol=1e-10, digits=digits, stride=100)
    traj = integrate(sys_, x0, (0.5, 3.0), cfg)
    k0 = traj.k_series[0]
    drift = max(abs(float(k - k0)) for k in traj.k_series)
    assert drift <= 1e-9 * abs(float(k0))
    assert float(traj.times[0]) == 0.5
    assert abs(float(traj.times[-1]) - 3.0) < 1e-9
