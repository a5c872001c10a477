"""Vector fields, standard-form reduction, and numerical integration.

The flow is x' = -L F(x) + eps * H(x); the node sum k = <1, x> is conserved
when eps = 0 and becomes the slow variable of the standard form otherwise.
Integrators run at a configurable precision tier (16/32/64 digits); the
extended tiers exist because trajectories hugging a repelling branch are
only as long as the available digits allow.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    DivergenceError,
    IntegrationStalledError,
)
from .graph import Graph
from .precision import ScalarContext, exact
from .prng import SplitMix64
from .response import ResponseField

DIVERGENCE_CUTOFF = 1e6
REGULARITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# perturbations

@dataclass(frozen=True)
class Perturbation:
    """Additive forcing H(x, params) with n components.

    Kinds: "constant" (fixed vector), "random-constant" (vector drawn once
    from a seeded splitmix64 stream, then constant), "callback" (arbitrary
    state-dependent function; simulation only).
    """

    n: int
    kind: str = "constant"
    values: tuple[Fraction, ...] | None = None
    func: Callable | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    seed: int | None = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.kind in ("constant", "random-constant"):
            if self.values is None or len(self.values) != self.n:
                raise DimensionMismatchError(
                    f"perturbation needs {self.n} components, got {self.values}"
                )
            object.__setattr__(self, "values", tuple(exact(v) for v in self.values))
        elif self.kind == "callback":
            if self.func is None:
                raise ValueError("callback perturbation needs a function")
        else:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")

    @classmethod
    def constant(cls, values, n: int | None = None) -> "Perturbation":
        if not hasattr(values, "__len__"):
            if n is None:
                raise ValueError("scalar constant perturbation needs n")
            values = [values] * n
        return cls(n=len(values), kind="constant", values=tuple(exact(v) for v in values))

    @classmethod
    def zero(cls, n: int) -> "Perturbation":
        return cls.constant([0] * n)

    @classmethod
    def random_constant(cls, n: int, seed: int, lo: float = 0.0, hi: float = 1.0) -> "Perturbation":
        rng = SplitMix64(seed)
        values = tuple(exact(rng.uniform(lo, hi)) for _ in range(n))
        return cls(n=n, kind="random-constant", values=values, seed=seed, lo=lo, hi=hi)

    @classmethod
    def from_callback(cls, func: Callable, n: int, params: Mapping[str, float] | None = None) -> "Perturbation":
        return cls(n=n, kind="callback", func=func, params=dict(params or {}))

    @property
    def is_state_independent(self) -> bool:
        return self.kind in ("constant", "random-constant")

    def evaluate(self, x):
        """Component values at state x, in the arithmetic domain of x."""
        if len(x) != self.n:
            raise DimensionMismatchError(f"state has {len(x)} components, expected {self.n}")
        if self.is_state_independent:
            from .response import _coerce  # same scalar coercion rules

            return [_coerce(v, x[0]) for v in self.values]
        return list(self.func(list(x), dict(self.params)))

    def component(self, i: int):
        """Evaluator for component i (1-based) as a function of the full state."""
        if self.is_state_independent:
            value = self.values[i - 1]
            return lambda x: value
        func, params = self.func, dict(self.params)
        return lambda x: func(list(x), params)[i - 1]

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"constant": {"values": [float(v) for v in self.values]}}
        if self.kind == "random-constant":
            return {"random": {"seed": self.seed, "lo": self.lo, "hi": self.hi}}
        return {"callback": True}


# ---------------------------------------------------------------------------
# systems

@dataclass(frozen=True)
class PerturbedSystem:
    """Bundle (graph, response field, perturbation, epsilon)."""

    graph: Graph
    field: ResponseField
    perturbation: Perturbation
    epsilon: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", exact(self.epsilon))
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.perturbation.n != self.graph.n:
            raise DimensionMismatchError(
                f"perturbation has {self.perturbation.n} components, graph has {self.graph.n} nodes"
            )

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def _neg_laplacian_float(self) -> np.ndarray:
        return -self.graph.laplacian_array()

    @cached_property
    def _laplacian_exact(self) -> list[list[Fraction]]:
        return self.graph.laplacian()

    # --- ODE-system protocol -------------------------------------------------
    @property
    def ode_dimension(self) -> int:
        return self.n

    def state_labels(self) -> list[str]:
        return [f"x{i}" for i in range(1, self.n + 1)]

    @property
    def k_in_state(self) -> bool:
        return False

    def slow_value(self, y):
        total = y[0]
        for v in y[1:]:
            total = total + v
        return total

    def rhs_function(self, ctx: ScalarContext):
        if ctx.is_float:
            neg_l = self._neg_laplacian_float
            eps = float(self.epsilon)
            fld = self.field
            pert = self.perturbation
            if pert.is_state_independent:
                eps_h = eps * np.array([float(v) for v in pert.values])

                def rhs(y: np.ndarray) -> np.ndarray:
                    return neg_l @ _field_values_float(fld, y) + eps_h

            else:

                def rhs(y: np.ndarray) -> np.ndarray:
                    h = np.asarray([float(v) for v in pert.evaluate(list(y))])
                    return neg_l @ _field_values_float(fld, y) + eps * h

            return rhs

        lap = [[ctx.scalar(v) for v in row] for row in self._laplacian_exact]
        eps = ctx.scalar(self.epsilon)
        fld = self.field
        pert = self.perturbation
        n = self.n

        def rhs(y: np.ndarray) -> np.ndarray:
            fvals = fld.evaluate(list(y))
            hvals = pert.evaluate(list(y))
            out = []
            for i in range(n):
                acc = ctx.scalar(0)
                row = lap[i]
                for j in range(n):
                    acc = acc - row[j] * fvals[j]
                out.append(acc + eps * hvals[i])
            return np.array(out, dtype=object)

        return rhs


def _field_values_float(fld: ResponseField, y: np.ndarray) -> np.ndarray:
    """Vectorised response values for float state vectors."""
    coeffs = getattr(fld.function, "coeffs", None)
    if coeffs is None:  # callback response: evaluate pointwise
        acc = np.array([float(fld.function.eval(float(v))) for v in y])
    else:
        acc = np.full_like(y, float(coeffs[-1]))
        for c in reversed(coeffs[:-1]):
            acc = acc * y + float(c)
    if fld.mean_gauges:
        mean = float(np.mean(y))
        acc = acc + sum(g.eval(mean) for g in fld.mean_gauges)
    return acc


def vector_field(sys: PerturbedSystem, x):
    """Evaluate -L F(x) + eps H(x) in the arithmetic domain of x.

    Float inputs use the cached numpy path; Fraction inputs stay exact.
    """
    if len(x) != sys.n:
        raise DimensionMismatchError(f"state has {len(x)} components, system has {sys.n}")
    if isinstance(x, np.ndarray) and x.dtype != object:
        return sys.rhs_function(ScalarContext(16))(np.asarray(x, dtype=float))
    if all(isinstance(v, (int, float)) for v in x):
        return list(sys.rhs_function(ScalarContext(16))(np.asarray(x, dtype=float)))
    # exact / extended path
    fvals = sys.field.evaluate(list(x))
    hvals = sys.perturbation.evaluate(list(x))
    lap = sys._laplacian_exact
    eps = sys.epsilon
    out = []
    for i in range(sys.n):
        acc = None
        for j in range(sys.n):
            term = lap[i][j] * fvals[j]
            acc = term if acc is None else acc + term
        out.append(-acc + eps * hvals[i])
    return out


@dataclass(frozen=True)
class StandardFormSystem:
    """Slow-fast standard form after eliminating node l via the conserved sum.

    State is (x_j for j != l, k); the eliminated coordinate is recovered as
    x_l = k - sum of the retained coordinates.
    """

    base: PerturbedSystem
    l: int

    def __post_init__(self):
        if not (1 <= self.l <= self.base.n):
            raise DimensionMismatchError(f"eliminated index {self.l} out of 1..{self.base.n}")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def kept(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n + 1) if j != self.l)

    def lift(self, fast, k):
        """Full state from (fast coordinates, k)."""
        total = k
        for v in fast:
            total = total - v
        full = list(fast)
        full.insert(self.l - 1, total)
        return full

    def project(self, x):
        """(fast coordinates, k) from a full state."""
        fast = [v for j, v in enumerate(x, start=1) if j != self.l]
        total = x[0]
        for v in x[1:]:
            total = total + v
        return fast, total

    # --- ODE-system protocol -------------------------------------------------
    @property
    def ode_dimension(self) -> int:
        return self.n

    def state_labels(self) -> list[str]:
        return [f"x{j}" for j in self.kept]

    @property
    def k_in_state(self) -> bool:
        return True

    def slow_value(self, y):
        return y[-1]

    def rhs_function(self, ctx: ScalarContext):
        sys = self.base
        n = sys.n
        l = self.l
        if ctx.is_float:
            neg_l = sys._neg_laplacian_float
            eps = float(sys.epsilon)
            fld = sys.field
            pert = sys.perturbation
            keep = [j - 1 for j in self.kept]

            def rhs(y: np.ndarray) -> np.ndarray:
                full = np.empty(n)
                full[keep] = y[:-1]
                full[l - 1] = y[-1] - float(np.sum(y[:-1]))
                h = np.array([float(v) for v in pert.evaluate(list(full))])
                fast = (neg_l @ _field_values_float(fld, full) + eps * h)[keep]
                return np.append(fast, eps * float(np.sum(h)))

            return rhs

        lap = [[ctx.scalar(v) for v in row] for row in sys._laplacian_exact]
        eps = ctx.scalar(sys.epsilon)
        fld = sys.field
        pert = sys.perturbation
        kept = self.kept

        def rhs(y: np.ndarray) -> np.ndarray:
            full = self.lift(list(y[:-1]), y[-1])
            fvals = fld.evaluate(full)
            hvals = pert.evaluate(full)
            out = []
            for i in kept:
                acc = ctx.scalar(0)
                row = lap[i - 1]
                for j in range(n):
                    acc = acc - row[j] * fvals[j]
                out.append(acc + eps * hvals[i - 1])
            hsum = hvals[0]
            for v in hvals[1:]:
                hsum = hsum + v
            out.append(eps * hsum)
            return np.array(out, dtype=object)

        return rhs


def to_standard_form(sys: PerturbedSystem, l: int) -> StandardFormSystem:
    return StandardFormSystem(sys, l)


def is_regular_perturbation(sys: PerturbedSystem, sample_states, tol: float = REGULARITY_TOL) -> bool:
    """Sampled check that the forcing sums to zero at every given state.

    A zero node-sum keeps k constant, so no slow variable appears.  This
    inspects only the supplied samples; it is a necessary check, not a proof.
    """
    if not sample_states:
        raise ValueError("need at least one sample state")
    for x in sample_states:
        total = None
        for v in sys.perturbation.evaluate(list(x)):
            total = v if total is None else total + v
        if abs(total) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# integration

@dataclass(frozen=True)
class IntegratorConfig:
    """Method, step policy and precision tier for one integration run."""

    method: str = "rk4"
    dt: float = 1e-3
    tol: float = 1e-8
    digits: int = 16
    stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("rk4", "dp45"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "dt": self.dt,
            "tol": self.tol,
            "digits": self.digits,
            "stride": self.stride,
            "seed": self.seed,
        }


@dataclass
class Trajectory:
    """Sampled states with the conserved/slow quantity and run metadata."""

    times: list
    states: list
    k_series: list
    labels: list[str]
    k_in_state: bool
    metadata: dict

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self):
        return self.states[-1]

    def recomputed_k(self, i: int):
        state = self.states[i]
        if self.k_in_state:
            return state[-1]
        total = state[0]
        for v in state[1:]:
            total = total + v
        return total

    def write_csv(self, stream, ctx: ScalarContext | None = None) -> None:
        ctx = ctx or ScalarContext(self.metadata.get("digits", 16))
        fast_slice = slice(None, -1) if self.k_in_state else slice(None)
        stream.write("t," + ",".join(self.labels) + ",k\n")
        for t, state, k in zip(self.times, self.states, self.k_series):
            cells = [ctx.format(t)]
            cells.extend(ctx.format(v) for v in state[fast_slice])
            cells.append(ctx.format(k))
            stream.write(",".join(cells) + "\n")


# Dormand-Prince 5(4) tableau; fifth-order solution is propagated.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _diverged(y) -> bool:
    for v in y:
        fv = float(abs(v))
        if math.isnan(fv) or fv > DIVERGENCE_CUTOFF:
            return True
    return False


def integrate(system, x0, tspan, cfg: IntegratorConfig, stop_condition=None) -> Trajectory:
    """Integrate any system exposing the small ODE protocol.

    `stop_condition(t, y)`, when given, ends the run early after recording
    the state that triggered it (used to bound open-ended tracking runs).
    Raises DivergenceError when a component passes the cutoff and
    IntegrationStalledError when the adaptive step underflows; both carry
    the partial trajectory.
    """
    t0, t1 = tspan
    if not t1 > t0:
        raise ValueError("tspan must satisfy t1 > t0")
    ctx = ScalarContext(cfg.digits)
    with ctx.workprec():
        rhs = system.rhs_function(ctx)
        y = ctx.vector(x0)
        if len(y) != system.ode_dimension:
            raise DimensionMismatchError(
                f"initial state has {len(y)} components, system has {system.ode_dimension}"
            )
        metadata = {
            "method": cfg.method,
            "digits": cfg.digits,
            "stride": cfg.stride,
            "seed": cfg.seed,
            "dt": cfg.dt,
            "tol": cfg.tol,
            "labels": list(system.state_labels()),
        }
        traj = Trajectory(
            times=[],
            states=[],
            k_series=[],
            labels=list(system.state_labels()),
            k_in_state=system.k_in_state,
            metadata=metadata,
        )

        def record(t, state):
            traj.times.append(t)
            traj.states.append(state.copy())
            traj.k_series.append(system.slow_value(state))

        if cfg.method == "rk4":
            _run_rk4(system, rhs, y, ctx, t0, t1, cfg, record, stop_condition, traj)
        else:
            _run_dp45(system, rhs, y, ctx, t0, t1, cfg, record, stop_condition, traj)
        return traj


def _rk4_step(rhs, y, t, dt):
    half = dt / 2
    k1 = rhs(y)
    k2 = rhs(y + half * k1)
    k3 = rhs(y + half * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _run_rk4(system, rhs, y, ctx, t0, t1, cfg, record, stop_condition, traj):
    span = float(t1) - float(t0)
    nsteps = max(1, round(span / cfg.dt))
    dt = ctx.scalar(exact(t1) - exact(t0)) / nsteps
    t = ctx.scalar(t0)
    record(t, y)
    for step in range(1, nsteps + 1):
        y = _rk4_step(rhs, y, t, dt)
        t = ctx.scalar(t0) + step * dt
        if _diverged(y):
            record(t, y)
            raise DivergenceError(f"state exceeded divergence cutoff at t={float(t)}", float(t), traj)
        if step % cfg.stride == 0 or step == nsteps:
            record(t, y)
        if stop_condition is not None and stop_condition(t, y):
            if step % cfg.stride != 0 and step != nsteps:
                record(t, y)
            break


def _run_dp45(system, rhs, y, ctx, t0, t1, cfg, record, stop_condition, traj):
    t = ctx.scalar(t0)
    t_end = ctx.scalar(t1)
    dt = ctx.scalar(min(cfg.dt, float(t1) - float(t0)))
    tol = cfg.tol
    record(t, y)
    accepted = 0
    fsal = rhs(y)
    while float(t) < float(t_end):
        if float(t) + float(dt) > float(t_end):
            dt = t_end - t
        ks = [fsal]
        for stage in range(1, 7):
            acc = y + (dt * _DP_A[stage][0]) * ks[0]
            for idx in range(1, stage):
                coeff = _DP_A[stage][idx]
                if coeff != 0.0:
                    acc = acc + (dt * coeff) * ks[idx]
            ks.append(rhs(acc))
        y5 = y + dt * sum(b * k for b, k in zip(_DP_B5, ks) if b != 0.0)
        y4 = y + dt * sum(b * k for b, k in zip(_DP_B4, ks) if b != 0.0)
        err = 0.0
        for a, b, yi in zip(y5, y4, y):
            scale = tol + tol * max(float(abs(yi)), float(abs(a)))
            err = max(err, float(abs(a - b)) / scale)
        if err <= 1.0:
            t = t + dt
            y = y5
            fsal = ks[6]  # first-same-as-last
            accepted += 1
            if _diverged(y):
                record(t, y)
                raise DivergenceError(f"state exceeded divergence cutoff at t={float(t)}", float(t), traj)
            if accepted % cfg.stride == 0 or float(t) >= float(t_end):
                record(t, y)
            if stop_condition is not None and stop_condition(t, y):
                if accepted % cfg.stride != 0 and float(t) < float(t_end):
                    record(t, y)
                return
        factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
        factor = min(5.0, max(0.2, factor))
        dt = dt * ctx.scalar(factor)
        if float(dt) < 1e-14 * max(1.0, abs(float(t))):
            record(t, y)
            raise IntegrationStalledError(
                f"step size underflow at t={float(t)}", float(t), traj
            )
    if traj.times and float(traj.times[-1]) < float(t):
        record(t, y)
