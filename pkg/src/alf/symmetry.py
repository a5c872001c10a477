"""Permutation groups, fixed-point spaces, and equivariance checks.

Fixed-point spaces are stored as partitions of the node set: a group element
fixing a state forces equality along its orbits, so the dimension of the
fixed subspace is simply the number of orbit classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dynamics import PerturbedSystem, vector_field
from .errors import (
    DimensionMismatchError,
    GroupEnumerationCapError,
    UnsupportedSymmetryError,
)
from .graph import Permutation, commutes_with_laplacian
from .precision import exact

ENUMERATION_CAP = 10**6
EQUIVARIANCE_TOL = 1e-12


@dataclass(frozen=True)
class PermutationGroup:
    """Group given by generators; elements are enumerated lazily and capped."""

    generators: tuple[Permutation, ...]

    def __post_init__(self):
        if not self.generators:
            raise ValueError("need at least one generator (use the identity for the trivial group)")
        n = self.generators[0].n
        if any(g.n != n for g in self.generators):
            raise DimensionMismatchError("generators act on different node counts")

    @property
    def n(self) -> int:
        return self.generators[0].n

    @classmethod
    def trivial(cls, n: int) -> "PermutationGroup":
        return cls((Permutation.identity(n),))

    @classmethod
    def symmetric(cls, n: int) -> "PermutationGroup":
        """Full symmetric group via adjacent transpositions."""
        if n == 1:
            return cls.trivial(1)
        gens = tuple(Permutation.transposition(n, i, i + 1) for i in range(1, n))
        return cls(gens)

    @classmethod
    def cyclic(cls, n: int) -> "PermutationGroup":
        return cls((Permutation.cyclic_shift(n),))

    @classmethod
    def dihedral(cls, n: int) -> "PermutationGroup":
        return cls((Permutation.cyclic_shift(n), Permutation.reversal(n)))

    @classmethod
    def from_json(cls, payload: dict) -> "PermutationGroup":
        """Parse {"generators": [[p(1),...,p(n)], ...]} with 1-based images."""
        gens = tuple(Permutation.from_one_based(img) for img in payload["generators"])
        return cls(gens)

    def to_json(self) -> dict:
        return {"generators": [list(g.image) for g in self.generators]}

    def _bfs(self, limit: int):
        """Breadth-first closure over generator products, stopping at limit."""
        identity = Permutation.identity(self.n)
        seen = {identity.image}
        frontier = [identity]
        while frontier:
            nxt = []
            for elem in frontier:
                for gen in self.generators:
                    prod = gen.compose(elem)
                    if prod.image not in seen:
                        seen.add(prod.image)
                        nxt.append(prod)
                        if len(seen) >= limit:
                            return seen, True
            frontier = nxt
        return seen, False

    def order(self, cap: int = ENUMERATION_CAP) -> int:
        seen, truncated = self._bfs(cap)
        if truncated:
            raise GroupEnumerationCapError(f"group has at least {cap} elements")
        return len(seen)

    def order_at_least(self, bound: int, cap: int = ENUMERATION_CAP) -> bool:
        """Early-exit order query: never enumerates past `bound`."""
        if bound > cap:
            raise GroupEnumerationCapError(f"bound {bound} exceeds cap {cap}")
        seen, _ = self._bfs(bound)
        return len(seen) >= bound

    def elements(self, cap: int = ENUMERATION_CAP) -> list[Permutation]:
        seen, truncated = self._bfs(cap)
        if truncated:
            raise GroupEnumerationCapError(f"group has at least {cap} elements")
        return [Permutation(img) for img in sorted(seen)]

    def orbits(self) -> list[frozenset[int]]:
        """Node orbits under the generated action (no enumeration needed)."""
        parent = list(range(self.n + 1))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int) -> None:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        for gen in self.generators:
            for i in range(1, self.n + 1):
                union(i, gen(i))
        classes: dict[int, set[int]] = {}
        for i in range(1, self.n + 1):
            classes.setdefault(find(i), set()).add(i)
        return sorted((frozenset(c) for c in classes.values()), key=min)


@dataclass(frozen=True)
class FixedPointSpace:
    """Partition of nodes into classes forced equal by the group action."""

    classes: tuple[frozenset[int], ...]

    @property
    def dimension(self) -> int:
        return len(self.classes)

    @property
    def is_consensus(self) -> bool:
        return len(self.classes) == 1


def fixed_point_space(group: PermutationGroup, n: int) -> FixedPointSpace:
    if group.n != n:
        raise DimensionMismatchError(f"group acts on {group.n} symbols, requested n={n}")
    return FixedPointSpace(tuple(group.orbits()))


def check_equivariance(sys: PerturbedSystem, p: Permutation, samples, tol: float = EQUIVARIANCE_TOL) -> bool:
    """Whether the full vector field commutes with the permutation at samples.

    Exact (tol 0 meaningful) when the samples are rational.
    """
    if p.n != sys.n:
        raise DimensionMismatchError("permutation size does not match the system")
    for x in samples:
        lhs = p.apply(vector_field(sys, list(x)))
        rhs = vector_field(sys, p.apply(list(x)))
        if any(abs(a - b) > tol for a, b in zip(lhs, rhs)):
            return False
    return True


def check_perturbation_equivariance(sys: PerturbedSystem, p: Permutation, samples, tol: float = EQUIVARIANCE_TOL) -> bool:
    """Same commutation test for the forcing term alone."""
    if p.n != sys.n:
        raise DimensionMismatchError("permutation size does not match the system")
    pert = sys.perturbation
    for x in samples:
        lhs = p.apply(pert.evaluate(list(x)))
        rhs = pert.evaluate(p.apply(list(x)))
        if any(abs(a - b) > tol for a, b in zip(lhs, rhs)):
            return False
    return True


def symmetry_generated_equilibria(sys: PerturbedSystem, c, signs) -> tuple[list, float]:
    """Equilibrium candidate (s1*c, ..., sn*c) from the sign action.

    Only meaningful for responses invariant under x -> -x; the residual of
    the unperturbed field at the candidate is returned alongside it.
    """
    if len(signs) != sys.n:
        raise DimensionMismatchError(f"need {sys.n} signs")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be +1 or -1")
    nontrivial = any(s == -1 for s in signs) and any(s == 1 for s in signs)
    if nontrivial and not sys.field.function.is_even():
        raise UnsupportedSymmetryError("response lacks sign symmetry; mixed signs do not map consensus to equilibria")
    unperturbed = PerturbedSystem(sys.graph, sys.field, sys.perturbation, Fraction(0))
    state = [s * exact(c) if isinstance(c, (int, float, Fraction)) else s * c for s in signs]
    residual_vec = vector_field(unperturbed, state)
    residual = max(abs(v) for v in residual_vec)
    return state, float(residual)


@dataclass(frozen=True)
class CanardCertificate:
    """Outcome of the symmetry route to an invariant consensus trajectory."""

    generators_commute: bool
    order_sufficient: bool
    fix_is_consensus: bool
    perturbation_equivariant: bool
    perturbation_nonzero: bool

    @property
    def verdict(self) -> bool:
        return (
            self.generators_commute
            and (self.order_sufficient or self.fix_is_consensus)
            and self.perturbation_equivariant
            and self.perturbation_nonzero
        )


def maximal_canard_certificate(
    sys: PerturbedSystem,
    group: PermutationGroup,
    samples,
    tol: float = EQUIVARIANCE_TOL,
    cap: int = ENUMERATION_CAP,
) -> CanardCertificate:
    """Check the symmetry conditions making the consensus line a trajectory.

    Conditions: supplied generators commute with the Laplacian, the group is
    large enough (order >= n, or its fixed space is already the consensus
    line), the forcing is equivariant at the samples, and the forcing does
    not vanish at the sampled consensus points.  A true verdict predicts an
    invariant consensus trajectory; integration tests confirm it downstream.
    """
    commute = all(commutes_with_laplacian(sys.graph, g, tol=0) for g in group.generators)
    fix = fixed_point_space(group, sys.n)
    order_ok = group.order_at_least(sys.n, cap=cap)
    equivariant = all(
        check_perturbation_equivariance(sys, g, samples, tol=tol) for g in group.generators
    )
    consensus_points = []
    for x in samples:
        total = x[0]
        for v in x[1:]:
            total = total + v
        consensus_points.append([total / sys.n] * sys.n)
    nonzero = all(
        max(abs(v) for v in sys.perturbation.evaluate(pt)) > tol for pt in consensus_points
    )
    return CanardCertificate(
        generators_commute=commute,
        order_sufficient=order_ok,
        fix_is_consensus=fix.is_consensus,
        perturbation_equivariant=equivariant,
        perturbation_nonzero=nonzero,
    )
