"""Shared fixtures and deterministic random helpers."""

from fractions import Fraction

import pytest

from alf import Graph, Permutation, ResponseField, ResponseFunction
from alf.prng import SplitMix64


def rational(rng: SplitMix64, denom: int = 100, span: int = 200) -> Fraction:
    """Small random rational in [-span/denom, span/denom)."""
    return Fraction(rng.next_u64() % (2 * span) - span, denom)


def rational_state(rng: SplitMix64, n: int) -> list[Fraction]:
    return [rational(rng) for _ in range(n)]


def random_permutation(rng: SplitMix64, n: int) -> Permutation:
    image = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):  # Fisher-Yates on the splitmix stream
        j = rng.next_u64() % (i + 1)
        image[i], image[j] = image[j], image[i]
    return Permutation(tuple(image))


def random_graph(rng: SplitMix64, n: int, edge_prob: float = 0.5) -> Graph:
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.uniform() < edge_prob:
                edges.append((i, j, Fraction(rng.next_u64() % 400 + 1, 100)))
    return Graph(n, tuple(edges))


@pytest.fixture
def ex1_response() -> ResponseFunction:
    """The double-well quartic (x-1)^2 (x+1)^2 used across the examples."""
    return ResponseFunction.from_roots([(1, 2), (-1, 2)])


@pytest.fixture
def ex1_field(ex1_response) -> ResponseField:
    return ResponseField(ex1_response)
