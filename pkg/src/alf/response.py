"""Scalar response functions (polynomials) and per-node response fields.

Coefficients are exact rationals so differentiation and evenness checks are
exact; evaluation follows the numeric type of the argument (float, mpf or
Fraction).  A factored form (roots with multiplicities) is kept alongside
the expanded coefficients when known, to avoid cancellation near the roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import UnsupportedStructureError
from .precision import exact

RESPONSE_FAMILIES = ("ex3a", "ex3b")


def _coerce(coeff: Fraction, like):
    """Bring an exact coefficient into the arithmetic domain of `like`."""
    if isinstance(like, (int, Fraction)):
        return coeff
    if isinstance(like, mpmath.mpf):
        return mpmath.mpf(coeff.numerator) / mpmath.mpf(coeff.denominator)
    return float(coeff)


@dataclass(frozen=True)
class ResponseFunction:
    """Dense polynomial a0 + a1 x + ... + aN x^N with exact coefficients."""

    coeffs: tuple[Fraction, ...]
    roots: tuple[tuple[Fraction, int], ...] | None = None
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        coeffs = tuple(exact(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "scale", exact(self.scale))
        if self.roots is not None:
            object.__setattr__(
                self, "roots", tuple((exact(r), int(m)) for r, m in self.roots)
            )

    @classmethod
    def from_coeffs(cls, coeffs) -> "ResponseFunction":
        return cls(tuple(exact(c) for c in coeffs))

    @classmethod
    def from_roots(cls, root_pairs, scale=1) -> "ResponseFunction":
        """Build scale * prod (x - r)^m, expanding the coefficients exactly."""
        coeffs = [exact(scale)]
        pairs = tuple((exact(r), int(m)) for r, m in root_pairs)
        for r, mult in pairs:
            for _ in range(mult):
                # multiply by (x - r)
                new = [Fraction(0)] * (len(coeffs) + 1)
                for k, c in enumerate(coeffs):
                    new[k + 1] += c
                    new[k] -= r * c
                coeffs = new
        return cls(tuple(coeffs), roots=pairs, scale=exact(scale))

    @classmethod
    def linear(cls) -> "ResponseFunction":
        return cls((Fraction(0), Fraction(1)))

    @classmethod
    def family(cls, tag: str, lam) -> "ResponseFunction":
        """Parameterised families used by the bifurcation scenarios.

        ex3a: (x - lam) (x + lam)^2      ex3b: (x - lam)^2 (x + lam)^2
        """
        lam = exact(lam)
        if tag == "ex3a":
            return cls.from_roots(((lam, 1), (-lam, 2)))
        if tag == "ex3b":
            return cls.from_roots(((lam, 2), (-lam, 2)))
        raise ValueError(f"unknown response family {tag!r}; expected one of {RESPONSE_FAMILIES}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Evaluate at x, preferring the factored form when available."""
        if self.roots is not None:
            acc = _coerce(self.scale, x)
            for r, mult in self.roots:
                factor = x - _coerce(r, x)
                for _ in range(mult):
                    acc = acc * factor
            return acc
        return self.eval_expanded(x)

    def eval_expanded(self, x):
        """Horner evaluation of the dense coefficient form."""
        acc = _coerce(self.coeffs[-1], x)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + _coerce(c, x)
        return acc

    def derivative(self, order: int = 1) -> "ResponseFunction":
        """Exact coefficient-level derivative of the given order (>= 1)."""
        if order < 1:
            raise ValueError("derivative order must be >= 1")
        coeffs = self.coeffs
        for _ in range(order):
            if len(coeffs) == 1:
                coeffs = (Fraction(0),)
                continue
            coeffs = tuple(Fraction(k) * coeffs[k] for k in range(1, len(coeffs)))
        return ResponseFunction(coeffs)

    def is_even(self) -> bool:
        """Exact invariance under x -> -x: all odd-degree coefficients vanish."""
        return all(c == 0 for c in self.coeffs[1::2])

    def to_json(self) -> dict:
        if self.roots is not None:
            return {
                "roots": [[float(r), m] for r, m in self.roots],
                "scale": float(self.scale),
            }
        return {"coeffs": [float(c) for c in self.coeffs]}


class CallbackResponse:
    """Adapter for non-polynomial scalar responses.

    Supports evaluation only, which is all simulation needs; the singularity
    analysis requires exact derivatives and refuses these.
    """

    def __init__(self, func, label: str = "callback"):
        self._func = func
        self.label = label

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        return self._func(x)

    def eval_expanded(self, x):
        return self._func(x)

    def derivative(self, order: int = 1):
        raise UnsupportedStructureError(
            "exact derivatives need a polynomial response; callback responses are simulation-only"
        )

    def is_even(self) -> bool:
        raise UnsupportedStructureError(
            "symmetry detection needs a polynomial response; callback responses are simulation-only"
        )


def eval_response(f: ResponseFunction, x):
    return f.eval(x)


def derivative(f: ResponseFunction, order: int = 1) -> ResponseFunction:
    return f.derivative(order)


def is_even(f: ResponseFunction) -> bool:
    return f.is_even()


@dataclass(frozen=True)
class ResponseField:
    """Homogeneous per-node response: every node shares one function.

    `mean_gauges` holds polynomials applied to the state mean and added to
    every component; such shifts live in the Laplacian kernel direction and
    leave the flow unchanged.
    """

    function: ResponseFunction
    mean_gauges: tuple[ResponseFunction, ...] = ()

    @property
    def homogeneous(self) -> bool:
        return True

    def evaluate(self, x):
        """Componentwise response values, same arithmetic domain as x."""
        out = [self.function.eval(xi) for xi in x]
        if self.mean_gauges:
            n = len(x)
            total = x[0]
            for xi in x[1:]:
                total = total + xi
            mean = total / n
            shift = None
            for gauge in self.mean_gauges:
                val = gauge.eval(mean)
                shift = val if shift is None else shift + val
            out = [v + shift for v in out]
        return out


def gauge_shift(field: ResponseField, h: ResponseFunction) -> ResponseField:
    """Add h(mean state) to every component of the response field."""
    return ResponseField(field.function, field.mean_gauges + (h,))
