"""Slow-fast analysis of complete-graph flows on the (x, k)-plane.

All nodes except one are identified, reducing the system to a fast variable
x and the slow node-sum k.  The critical set is the zero set of
f(x) - f(k - (n-1)x); the consensus line x = k/n always belongs to it.
Singular consensus points (where f' vanishes) are classified by the sign
ratio of the response curvature against the perturbation sum, which decides
between the two transcritical types, and by the scalar deciding whether the
trajectory can continue along the repelling stretch (canard threshold 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .dynamics import Perturbation, PerturbedSystem
from .errors import (
    ContinuationFailedError,
    PreconditionError,
    SymmetryViolationError,
    UnsupportedStructureError,
)
from .precision import ScalarContext, exact
from .response import ResponseFunction

import numpy as np

SINGULAR_TOL = 1e-10
LAMBDA_TOL = 1e-9
CRITICAL_TOL = 1e-12

ATTRACTING = "attracting"
REPELLING = "repelling"
SINGULAR = "singular"


def _component_value(comp, x, k, params):
    if callable(comp):
        return comp(x, k, params)
    return comp


@dataclass(frozen=True)
class PlaneSystem:
    """Reduced flow on the (x, k)-plane.

    `g` is the shared perturbation component of the identified nodes and
    `g_tilde` the component of the eliminated node; each is either an exact
    constant or a callable (x, k, params) -> scalar.
    """

    n: int
    f: ResponseFunction
    g: object = Fraction(0)
    g_tilde: object = Fraction(0)
    epsilon: Fraction = Fraction(0)
    params: dict | None = None

    def __post_init__(self):
        if self.n < 2:
            raise UnsupportedStructureError("plane reduction needs at least 2 nodes")
        object.__setattr__(self, "epsilon", exact(self.epsilon))
        if not callable(self.g):
            object.__setattr__(self, "g", exact(self.g))
        if not callable(self.g_tilde):
            object.__setattr__(self, "g_tilde", exact(self.g_tilde))

    def mirror(self, x, k):
        """The eliminated coordinate k - (n-1) x."""
        return k - (self.n - 1) * x

    def layer_value(self, x, k):
        """f(x) - f(k - (n-1)x); zero on the critical set."""
        return self.f.eval(x) - self.f.eval(self.mirror(x, k))

    def layer_jacobian(self, x, k):
        """d/dx of the fast right-hand side: negative where attracting."""
        fp = self.f.derivative()
        return -(fp.eval(x) + (self.n - 1) * fp.eval(self.mirror(x, k)))

    def g_value(self, x, k):
        return _component_value(self.g, x, k, self.params or {})

    def g_tilde_value(self, x, k):
        return _component_value(self.g_tilde, x, k, self.params or {})

    def slow_rhs_factor(self, x, k):
        """(n-1) g + g_tilde, the slow drift divided by epsilon."""
        return (self.n - 1) * self.g_value(x, k) + self.g_tilde_value(x, k)

    # --- ODE-system protocol -------------------------------------------------
    @property
    def ode_dimension(self) -> int:
        return 2

    def state_labels(self) -> list[str]:
        return ["x"]

    @property
    def k_in_state(self) -> bool:
        return True

    def slow_value(self, y):
        return y[1]

    def rhs_function(self, ctx: ScalarContext):
        n = self.n
        f = self.f
        eps = ctx.scalar(self.epsilon)
        params = self.params or {}
        g, g_tilde = self.g, self.g_tilde
        g_const = None if callable(g) else ctx.scalar(g)
        gt_const = None if callable(g_tilde) else ctx.scalar(g_tilde)

        def rhs(y):
            x, k = y[0], y[1]
            gv = g(x, k, params) if g_const is None else g_const
            gtv = g_tilde(x, k, params) if gt_const is None else gt_const
            fast = -(f.eval(x) - f.eval(k - (n - 1) * x)) + eps * gv
            slow = eps * ((n - 1) * gv + gtv)
            if ctx.is_float:
                return np.array([fast, slow], dtype=float)
            return np.array([fast, slow], dtype=object)

        return rhs


def plane_reduce(sys: PerturbedSystem, l: int) -> PlaneSystem:
    """Restrict a complete-graph system to the (x, k)-plane.

    Requires all perturbation components except the eliminated one to agree
    (exactly for constant perturbations, sampled for callbacks); otherwise
    the identified-nodes subspace is not invariant and the reduction is
    meaningless.
    """
    if not sys.graph.is_complete():
        raise UnsupportedStructureError("plane reduction is defined for complete graphs only")
    n = sys.n
    if not (1 <= l <= n):
        raise PreconditionError(f"eliminated index {l} out of 1..{n}")
    pert = sys.perturbation
    kept = [j for j in range(1, n + 1) if j != l]
    if pert.is_state_independent:
        vals = pert.values
        shared = vals[kept[0] - 1]
        if any(vals[j - 1] != shared for j in kept[1:]):
            raise SymmetryViolationError(
                "perturbation components of the identified nodes differ"
            )
        return PlaneSystem(n=n, f=sys.field.function, g=shared, g_tilde=vals[l - 1],
                           epsilon=sys.epsilon, params=dict(pert.params))

    def lift(x, k):
        full = [x] * n
        full[l - 1] = k - (n - 1) * x
        return full

    # sampled symmetry check for state-dependent perturbations
    for x_probe, k_probe in ((0.3, 1.1), (-0.7, 0.4), (1.2, -2.5)):
        h = pert.evaluate(lift(x_probe, k_probe))
        shared = h[kept[0] - 1]
        if any(abs(h[j - 1] - shared) > 1e-12 for j in kept[1:]):
            raise SymmetryViolationError(
                "perturbation components of the identified nodes differ at sampled states"
            )

    params = dict(pert.params)
    first = kept[0]

    def g(x, k, _params):
        return pert.evaluate(lift(x, k))[first - 1]

    def g_tilde(x, k, _params):
        return pert.evaluate(lift(x, k))[l - 1]

    return PlaneSystem(n=n, f=sys.field.function, g=g, g_tilde=g_tilde,
                       epsilon=sys.epsilon, params=params)


# ---------------------------------------------------------------------------
# consensus stability

@dataclass(frozen=True)
class StabilityResult:
    tag: str
    jacobian: float


def consensus_stability(ps: PlaneSystem, x_star, tol: float = SINGULAR_TOL) -> StabilityResult:
    """Classify a consensus point by the response slope.

    Positive slope attracts, negative repels; a slope below tol (scaled by
    the local curvature) is singular.  Also reports the layer Jacobian
    -n f'(x*) at the point.
    """
    fp = ps.f.derivative().eval(x_star)
    curv = ps.f.derivative(2).eval(x_star)
    if abs(fp) <= tol * (1 + abs(curv)):
        tag = SINGULAR
    elif fp > 0:
        tag = ATTRACTING
    else:
        tag = REPELLING
    return StabilityResult(tag, -ps.n * float(fp))


def flow_stability_probe(ps: PlaneSystem, k: float, offset: float = 1e-6) -> str:
    """Brute-force stability of the consensus point at a given k.

    Looks only at the signs of the layer flow on both sides of x* = k/n,
    independent of any derivative formula.
    """
    x_star = k / ps.n
    above = -ps.layer_value(x_star + offset, k)
    below = -ps.layer_value(x_star - offset, k)
    if above < 0 < below:
        return ATTRACTING
    if below < 0 < above:
        return REPELLING
    return SINGULAR


# ---------------------------------------------------------------------------
# critical-set sampling

@dataclass(frozen=True)
class ManifoldPoint:
    k: float
    x: float
    branch: int
    stability: str
    consensus: bool


@dataclass(frozen=True)
class ManifoldSample:
    points: tuple[ManifoldPoint, ...]

    def branch_ids(self) -> list[int]:
        return sorted({p.branch for p in self.points})

    def branch_count(self) -> int:
        return len({p.branch for p in self.points})

    def roots_at(self, k: float, tol: float = 1e-12) -> list[float]:
        return sorted(p.x for p in self.points if abs(p.k - k) <= tol)


def _bisect_root(func: Callable[[float], float], lo: float, hi: float, iterations: int = 200) -> float:
    flo = func(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if fmid == 0.0 or hi - lo < 1e-15 * max(1.0, abs(mid)):
            return mid
        if (flo < 0) != (fmid < 0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _newton_polish(func, deriv, x0: float, iterations: int = 30) -> float:
    x = x0
    for _ in range(iterations):
        fx = func(x)
        dx = deriv(x)
        if dx == 0.0 or not math.isfinite(dx):
            break
        step = fx / dx
        x_new = x - step
        if not math.isfinite(x_new):
            break
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def sample_manifold(ps: PlaneSystem, k_range, x_range, grid, residual_tol: float = 1e-10) -> ManifoldSample:
    """Root scan of the layer equation over a (k, x) window.

    Per k gridline, roots of f(x) - f(k - (n-1)x) are located by sign-change
    bracketing plus bisection and a Newton polish; the consensus root k/n is
    always included.  Branch ids connect nearest roots across consecutive
    gridlines (threshold five x-grid spacings); the consensus chain keeps a
    stable id.  Every emitted point is asserted against `residual_tol`.
    """
    if isinstance(grid, int):
        grid = (grid, grid)
    nk, nx = grid
    if nk < 2 or nx < 2:
        raise ValueError("grid must have at least 2 points per axis")
    k_lo, k_hi = map(float, k_range)
    x_lo, x_hi = map(float, x_range)
    dx = (x_hi - x_lo) / (nx - 1)
    link_tol = 5.0 * dx
    fp = ps.f.derivative()

    points: list[ManifoldPoint] = []
    next_branch = 1
    prev: list[tuple[float, int]] = []  # (x, branch) on the previous gridline
    prev_consensus_branch = None

    for ik in range(nk):
        k = k_lo + (k_hi - k_lo) * ik / (nk - 1)

        def phi(x, _k=k):
            return float(ps.layer_value(x, _k))

        def dphi(x, _k=k):
            return float(fp.eval(x) + (ps.n - 1) * fp.eval(ps.mirror(x, _k)))

        roots: list[float] = []
        consensus_x = k / ps.n
        if x_lo <= consensus_x <= x_hi:
            roots.append(consensus_x)
        values = [phi(x_lo + i * dx) for i in range(nx)]
        for i in range(nx - 1):
            a, b = values[i], values[i + 1]
            if a == 0.0:
                roots.append(x_lo + i * dx)
                continue
            if (a < 0) != (b < 0):
                lo = x_lo + i * dx
                hi = lo + dx
                root = _bisect_root(phi, lo, hi)
                polished = _newton_polish(phi, dphi, root)
                # keep the polish only when it stays in the bracket and helps
                if abs(polished - root) <= dx and abs(phi(polished)) <= abs(phi(root)):
                    root = polished
                roots.append(root)
        if values[-1] == 0.0:
            roots.append(x_hi)

        # dedupe (consensus root may also arise from the scan)
        merged: list[tuple[float, bool]] = []
        for j, x in enumerate(sorted(roots, key=lambda v: (abs(v - consensus_x) > 1e-9, v))):
            is_consensus = j == 0 and x_lo <= consensus_x <= x_hi and abs(x - consensus_x) <= 1e-9
            if any(abs(x - other) <= max(1e-9, 1e-9 * abs(x)) for other, _ in merged):
                continue
            merged.append((x, is_consensus))
        merged.sort()

        # branch continuation against the previous gridline
        line_entries = []
        available = list(prev)
        for x, is_consensus in merged:
            branch = None
            if is_consensus and prev_consensus_branch is not None:
                branch = prev_consensus_branch
            else:
                best = None
                for idx, (px, pb) in enumerate(available):
                    d = abs(px - x)
                    if d <= link_tol and (best is None or d < best[0]):
                        best = (d, idx, pb)
                if best is not None:
                    branch = best[2]
                    available.pop(best[1])
            if branch is None:
                branch = 0 if is_consensus and prev_consensus_branch is None and not points else next_branch
                if branch == next_branch:
                    next_branch += 1
            line_entries.append((x, branch, is_consensus))

        prev = [(x, b) for x, b, _ in line_entries]
        for x, branch, is_consensus in line_entries:
            if is_consensus:
                prev_consensus_branch = branch
            residual = abs(phi(x))
            assert residual <= residual_tol, (
                f"manifold point (k={k}, x={x}) has residual {residual} > {residual_tol}"
            )
            jac = float(ps.layer_jacobian(x, k))
            jac_slope = float(
                -(ps.f.derivative(2).eval(x) - (ps.n - 1) ** 2 * ps.f.derivative(2).eval(ps.mirror(x, k)))
            )
            if abs(jac) <= SINGULAR_TOL * (1 + abs(jac_slope)):
                tag = SINGULAR
            elif jac < 0:
                tag = ATTRACTING
            else:
                tag = REPELLING
            points.append(ManifoldPoint(k=k, x=x, branch=branch, stability=tag, consensus=is_consensus))

    return ManifoldSample(tuple(points))


# ---------------------------------------------------------------------------
# singularity analysis

@dataclass(frozen=True)
class SingularityReport:
    """Everything decided at one singular consensus point."""

    n: int
    x_s: object
    k_s: object
    d2f: object
    pert_shared: object
    pert_last: object
    pert_sum: object
    rho: int | None
    sing_type: str
    lam: object | None
    canard: bool
    tangent_intercept: object
    tangent_slope: int
    non_transversal: bool = False

    def to_json(self) -> dict:
        return {
            "x_s": float(self.x_s),
            "k_s": float(self.k_s),
            "d2f": float(self.d2f),
            "pert_sum": float(self.pert_sum),
            "rho": self.rho,
            "type": self.sing_type,
            "lambda": None if self.lam is None else float(self.lam),
            "canard": self.canard,
            "non_transversal": self.non_transversal,
            "tangent": {
                "intercept": float(self.tangent_intercept),
                "slope": float(self.tangent_slope),
            },
        }


def _sign(v) -> int:
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def _lambda_cross_check(n, d2f_center, d2f_mirror, h, h_tilde, lam) -> None:
    """Verify the simplified threshold scalar against the generic one.

    The generic route assembles the half second partials of the fast
    equation in (x, k) plus the forcing terms and evaluates
    (delta*alpha + g0*beta) / (|g0| sqrt(beta^2 - gamma*alpha)); it must
    reproduce `lam`.  Exact when everything is rational, else to 1e-9.
    """
    alpha = Fraction(-exact(d2f_center) + (n - 1) ** 2 * exact(d2f_mirror), 2)
    beta = Fraction(-(n - 1) * exact(d2f_mirror), 2)
    gamma = Fraction(exact(d2f_mirror), 2)
    delta = exact(h)
    g0 = (n - 1) * exact(h) + exact(h_tilde)
    disc = beta * beta - gamma * alpha
    if disc <= 0 or g0 == 0:
        raise PreconditionError("generic transcritical conditions fail at this point")
    numer = delta * alpha + g0 * beta
    target = exact(lam) * abs(g0)
    # compare numer / sqrt(disc) with target by squaring (avoids irrational sqrt)
    lhs = numer * numer
    rhs = target * target * disc
    if _sign(numer) != _sign(target):
        raise AssertionError("threshold scalar sign mismatch between the two routes")
    all_exact = all(
        isinstance(v, (int, Fraction)) for v in (d2f_center, d2f_mirror, h, h_tilde, lam)
    )
    tol = Fraction(0) if all_exact else Fraction(1, 10**12)
    scale = max(abs(lhs), abs(rhs), Fraction(1))
    if abs(lhs - rhs) > tol * scale:
        raise AssertionError(
            f"threshold scalar mismatch: squared values {float(lhs)} vs {float(rhs)}"
        )


def analyze_singularity(
    ps: PlaneSystem,
    x_s,
    singular_tol: float = SINGULAR_TOL,
    lambda_tol: float = LAMBDA_TOL,
) -> SingularityReport:
    """Classify a singular consensus point of the plane system.

    Computes the response curvature, the perturbation sum, the sign ratio
    deciding the transcritical type, the canard threshold scalar, and the
    tangent line of the crossing branch.  A two-node system is reported as
    non-transversal rather than rejected.
    """
    if consensus_stability(ps, x_s, tol=singular_tol).tag != SINGULAR:
        raise PreconditionError(f"x = {x_s} is not a singular consensus point")
    n = ps.n
    k_s = n * x_s
    d2f = ps.f.derivative(2).eval(x_s)
    mirror = ps.mirror(x_s, k_s)
    d2f_mirror = ps.f.derivative(2).eval(mirror)
    h = ps.g_value(x_s, k_s)
    h_tilde = ps.g_tilde_value(x_s, k_s)
    pert_sum = (n - 1) * h + h_tilde

    tangent_intercept = 2 * x_s
    tangent_slope = n - 2

    if n == 2:
        return SingularityReport(
            n=n, x_s=x_s, k_s=k_s, d2f=d2f, pert_shared=h, pert_last=h_tilde,
            pert_sum=pert_sum, rho=None, sing_type="non-transcritical", lam=None,
            canard=False, tangent_intercept=tangent_intercept,
            tangent_slope=tangent_slope, non_transversal=True,
        )
    if d2f == 0 or pert_sum == 0:
        return SingularityReport(
            n=n, x_s=x_s, k_s=k_s, d2f=d2f, pert_shared=h, pert_last=h_tilde,
            pert_sum=pert_sum, rho=None, sing_type="degenerate", lam=None,
            canard=False, tangent_intercept=tangent_intercept,
            tangent_slope=tangent_slope,
        )

    rho = _sign(d2f) * _sign(pert_sum)  # equals sgn(d2f)/sgn(pert sum)
    sing_type = "type-1" if rho == -1 else "type-2"

    exact_inputs = all(isinstance(v, (int, Fraction)) for v in (h, h_tilde))
    if exact_inputs:
        lam = -Fraction(rho) * Fraction(exact(h) + (n - 1) * exact(h_tilde),
                                        exact(h_tilde) + (n - 1) * exact(h))
    else:
        lam = -rho * (h + (n - 1) * h_tilde) / (h_tilde + (n - 1) * h)
    _lambda_cross_check(n, d2f, d2f_mirror, h, h_tilde, lam)

    if exact_inputs:
        canard = sing_type == "type-1" and lam == 1
    else:
        canard = sing_type == "type-1" and abs(lam - 1) <= lambda_tol

    return SingularityReport(
        n=n, x_s=x_s, k_s=k_s, d2f=d2f, pert_shared=h, pert_last=h_tilde,
        pert_sum=pert_sum, rho=rho, sing_type=sing_type, lam=lam, canard=canard,
        tangent_intercept=tangent_intercept, tangent_slope=tangent_slope,
    )


def is_critical_perturbation(pert: Perturbation, x_s, n: int, tol: float = CRITICAL_TOL) -> bool:
    """All forcing components equal and nonzero at the consensus point."""
    point = [x_s] * n
    values = pert.evaluate(point)
    first = values[0]
    if abs(first) <= tol:
        return False
    return all(abs(v - first) <= tol for v in values[1:])


def find_singular_points(f: ResponseFunction, lo: float, hi: float, samples: int = 2001) -> list[float]:
    """Real zeros of f' in [lo, hi] by sign-change scanning plus polish."""
    fp = f.derivative()
    fpp = f.derivative(2)

    def func(x):
        return float(fp.eval(x))

    def dfunc(x):
        return float(fpp.eval(x))

    step = (hi - lo) / (samples - 1)
    roots: list[float] = []
    values = [func(lo + i * step) for i in range(samples)]
    for i in range(samples - 1):
        a, b = values[i], values[i + 1]
        x_a = lo + i * step
        if a == 0.0:
            roots.append(x_a)
            continue
        if (a < 0) != (b < 0):
            root = _bisect_root(func, x_a, x_a + step)
            polished = _newton_polish(func, dfunc, root)
            if abs(polished - root) <= step and abs(func(polished)) <= abs(func(root)):
                root = polished
            roots.append(root)
    if values[-1] == 0.0:
        roots.append(hi)
    merged: list[float] = []
    for r in sorted(roots):
        if not merged or abs(r - merged[-1]) > 1e-9 * max(1.0, abs(r)):
            merged.append(r)
    return merged


def tangent_slope_estimate(ps: PlaneSystem, report: SingularityReport, h_step: float = 1e-5) -> float:
    """Secant slope dk/dx of the crossing branch through the singular point.

    Continues the non-consensus root of the layer equation from both sides
    of the singular point: at x = x_s +/- h the partner coordinate r with
    f(r) = f(x) is found by Newton from the mirrored guess 2 x_s - x, and
    k(x) = (n-1) x + r.  The result should sit within 1e-3 of n - 2 for
    polynomial responses once h_step <= 1e-4.
    """
    if report.sing_type not in ("type-1", "type-2"):
        raise PreconditionError("tangent continuation needs a transcritical report")
    x_s = float(report.x_s)
    f = ps.f
    fp = f.derivative()

    def partner(x: float) -> float:
        target = float(f.eval(x))
        r = 2 * x_s - x
        for _ in range(80):
            val = float(f.eval(r)) - target
            dv = float(fp.eval(r))
            if dv == 0.0 or not math.isfinite(dv):
                break
            step = val / dv
            r_new = r - step
            if not math.isfinite(r_new):
                raise ContinuationFailedError(f"partner-root iteration diverged near x={x}")
            if abs(step) <= 1e-16 * max(1.0, abs(r)):
                r = r_new
                break
            r = r_new
        if abs(float(f.eval(r)) - target) > 1e-8 * (1.0 + abs(target)):
            raise ContinuationFailedError(f"no partner root found near x={x}")
        if abs(r - x) < abs(x - x_s) / 2:
            raise ContinuationFailedError(f"continuation collapsed onto the consensus root at x={x}")
        return r

    h = float(h_step)
    k_plus = (ps.n - 1) * (x_s + h) + partner(x_s + h)
    k_minus = (ps.n - 1) * (x_s - h) + partner(x_s - h)
    return (k_plus - k_minus) / (2 * h)


# ---------------------------------------------------------------------------
# slow-divergence integral

def _adaptive_simpson(func, a: float, b: float, tol: float) -> float:
    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, tol_local, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flmid = func(lmid)
        frmid = func(rmid)
        left = simpson(lo, mid, flo, flmid, fmid)
        right = simpson(mid, hi, fmid, frmid, fhi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol_local:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, flo, flmid, fmid, left, tol_local / 2.0, depth - 1) + recurse(
            mid, hi, fmid, frmid, fhi, right, tol_local / 2.0, depth - 1
        )

    fa, fb = func(a), func(b)
    mid = 0.5 * (a + b)
    fmid = func(mid)
    whole = simpson(a, b, fa, fmid, fb)
    return recurse(a, b, fa, fmid, fb, whole, tol, 50)


def slow_divergence_integral(ps: PlaneSystem, k1, k2, quad_tol: float = 1e-10) -> float:
    """Adaptive quadrature of -n f'(k/n) over [k1, k2].

    Measures the accumulated attraction/repulsion along the consensus line;
    a vanishing value means the two effects compensate over the window.
    """
    if not k2 > k1:
        raise PreconditionError("need k1 < k2")
    n = ps.n
    fp = ps.f.derivative()

    def integrand(k: float) -> float:
        return -n * float(fp.eval(k / n))

    return _adaptive_simpson(integrand, float(k1), float(k2), quad_tol)


def slow_divergence_exact(ps: PlaneSystem, k1, k2) -> Fraction:
    """Closed form of the same integral via the antiderivative.

    Substituting u = k/n gives -n^2 [f(k2/n) - f(k1/n)]; exact in rational
    arithmetic, used as the independent cross-check of the quadrature.
    """
    n = ps.n
    a = exact(k1) / n
    b = exact(k2) / n
    return -Fraction(n * n) * (ps.f.eval(b) - ps.f.eval(a))
