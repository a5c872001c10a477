"""Weighted simple graphs, their Laplacian algebra, and permutations.

Nodes are labelled 1..n.  Edge weights are stored as exact rationals
(floats convert losslessly), so algebraic identities such as the zero row
sums of the Laplacian hold exactly and are testable without tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatchError, InvalidGraphError
from .precision import exact

ZERO_EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True)
class Permutation:
    """Bijection on {1..n}, stored as the image tuple: image[i-1] = sigma(i)."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if sorted(self.image) != list(range(1, n + 1)):
            raise InvalidGraphError(f"not a bijection on 1..{n}: {self.image}")

    @property
    def n(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        image = list(range(1, n + 1))
        image[i - 1], image[j - 1] = j, i
        return cls(tuple(image))

    @classmethod
    def cyclic_shift(cls, n: int) -> "Permutation":
        """The n-cycle 1 -> 2 -> ... -> n -> 1."""
        return cls(tuple(list(range(2, n + 1)) + [1]))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        """The order-reversing involution i -> n + 1 - i."""
        return cls(tuple(range(n, 0, -1)))

    @classmethod
    def from_one_based(cls, image) -> "Permutation":
        return cls(tuple(int(v) for v in image))

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def apply(self, x):
        """Permute a state vector: component i moves to slot sigma(i)."""
        if len(x) != self.n:
            raise DimensionMismatchError(f"state has length {len(x)}, permutation acts on {self.n}")
        out = [None] * self.n
        for i, target in enumerate(self.image):
            out[target - 1] = x[i]
        return out

    def matrix(self) -> list[list[int]]:
        m = [[0] * self.n for _ in range(self.n)]
        for j, target in enumerate(self.image):
            m[target - 1][j] = 1
        return m

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self * other)(i) = self(other(i))."""
        if other.n != self.n:
            raise DimensionMismatchError("permutation sizes differ")
        return Permutation(tuple(self.image[other.image[i] - 1] for i in range(self.n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, target in enumerate(self.image):
            inv[target - 1] = i + 1
        return Permutation(tuple(inv))


@dataclass(frozen=True)
class Graph:
    """Weighted undirected simple graph on nodes 1..n.

    `edges` is a sorted tuple of (i, j, weight) with i < j; weights are
    strictly positive Fractions.  Symmetry is guaranteed by construction.
    """

    n: int
    edges: tuple[tuple[int, int, Fraction], ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraphError(f"node count must be >= 1, got {self.n}")
        seen = set()
        norm = []
        for i, j, w in self.edges:
            if i == j:
                raise InvalidGraphError(f"self-loop at node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidGraphError(f"edge ({i},{j}) out of range 1..{self.n}")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise InvalidGraphError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            w = exact(w)
            if w <= 0:
                raise InvalidGraphError(f"edge ({i},{j}) has non-positive weight {w}")
            norm.append((i, j, w))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def complete(cls, n: int, weight=1) -> "Graph":
        return cls(n, tuple((i, j, exact(weight)) for i in range(1, n + 1) for j in range(i + 1, n + 1)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise InvalidGraphError("cycle graphs need at least 3 nodes")
        edges = [(i, i + 1, Fraction(1)) for i in range(1, n)] + [(1, n, Fraction(1))]
        return cls(n, tuple(edges))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, tuple((i, i + 1, Fraction(1)) for i in range(1, n)))

    @classmethod
    def from_edge_list(cls, n: int, edge_list) -> "Graph":
        """Build from [(i, j), ...] or [(i, j, w), ...] entries."""
        edges = []
        for entry in edge_list:
            if len(entry) == 2:
                i, j = entry
                edges.append((int(i), int(j), Fraction(1)))
            else:
                i, j, w = entry
                edges.append((int(i), int(j), exact(w)))
        return cls(n, tuple(edges))

    def weight(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        for a, b, w in self.edges:
            if (a, b) == (i, j):
                return w
        return Fraction(0)

    def degree(self, i: int) -> Fraction:
        total = Fraction(0)
        for a, b, w in self.edges:
            if i in (a, b):
                total += w
        return total

    def is_complete(self) -> bool:
        return len(self.edges) == self.n * (self.n - 1) // 2

    def adjacency(self) -> list[list[Fraction]]:
        a = [[Fraction(0)] * self.n for _ in range(self.n)]
        for i, j, w in self.edges:
            a[i - 1][j - 1] = w
            a[j - 1][i - 1] = w
        return a

    def laplacian(self) -> list[list[Fraction]]:
        """Degree matrix minus adjacency matrix, in exact rationals."""
        lap = [[Fraction(0)] * self.n for _ in range(self.n)]
        for i, j, w in self.edges:
            lap[i - 1][j - 1] -= w
            lap[j - 1][i - 1] -= w
            lap[i - 1][i - 1] += w
            lap[j - 1][j - 1] += w
        return lap

    def laplacian_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.laplacian()])

    def connected_components(self) -> list[frozenset[int]]:
        """Node partition into components, sorted by smallest member."""
        neighbors: dict[int, list[int]] = {i: [] for i in range(1, self.n + 1)}
        for i, j, _ in self.edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        unseen = set(range(1, self.n + 1))
        components = []
        while unseen:
            root = min(unseen)
            stack, comp = [root], set()
            unseen.discard(root)
            while stack:
                node = stack.pop()
                comp.add(node)
                for nb in neighbors[node]:
                    if nb in unseen:
                        unseen.discard(nb)
                        stack.append(nb)
            components.append(frozenset(comp))
        return sorted(components, key=min)

    def to_json(self) -> dict:
        return {
            "type": "custom",
            "n": self.n,
            "edges": [[i, j, float(w)] for i, j, w in self.edges],
        }


def build_complete(n: int) -> Graph:
    return Graph.complete(n)


def laplacian(g: Graph) -> list[list[Fraction]]:
    return g.laplacian()


def connected_components(g: Graph) -> list[frozenset[int]]:
    return g.connected_components()


def commutes_with_laplacian(g: Graph, p: Permutation, tol=0) -> bool:
    """Whether L and the permutation matrix commute, to max-norm `tol`.

    Computed in exact rational arithmetic, so tol=0 is meaningful.
    """
    if p.n != g.n:
        raise DimensionMismatchError(f"permutation on {p.n} symbols, graph has {g.n} nodes")
    lap = g.laplacian()
    sigma = p.matrix()
    worst = Fraction(0)
    for i in range(g.n):
        for j in range(g.n):
            ls = sum(lap[i][k] * sigma[k][j] for k in range(g.n))
            sl = sum(sigma[i][k] * lap[k][j] for k in range(g.n))
            worst = max(worst, abs(ls - sl))
    return worst <= tol


def laplacian_eigenvalues(g: Graph) -> np.ndarray:
    """Eigenvalues of the (symmetric) Laplacian, ascending, at double precision."""
    return np.linalg.eigvalsh(g.laplacian_array())


def zero_eigenvalue_count(g: Graph, tol: float = ZERO_EIGENVALUE_TOL) -> int:
    """Number of numerically-zero Laplacian eigenvalues.

    The threshold scales with the matrix magnitude so heavy weights do not
    misclassify small nonzero eigenvalues.
    """
    lap = g.laplacian_array()
    scale = max(1.0, float(np.max(np.abs(lap)))) if lap.size else 1.0
    eigs = np.linalg.eigvalsh(lap)
    return int(np.sum(np.abs(eigs) < tol * scale))
