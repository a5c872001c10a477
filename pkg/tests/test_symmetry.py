from fractions import Fraction

import pytest

from alf import (
    Graph,
    GroupEnumerationCapError,
    Permutation,
    PermutationGroup,
    Perturbation,
    PerturbedSystem,
    ResponseField,
    ResponseFunction,
    UnsupportedSymmetryError,
    check_equivariance,
    fixed_point_space,
    integrate,
    IntegratorConfig,
    maximal_canard_certificate,
    symmetry_generated_equilibria,
)
from alf.prng import SplitMix64

from conftest import random_permutation, rational_state


def _system(n, response, pert=None, eps=0):
    pert = pert if pert is not None else Perturbation.zero(n)
    return PerturbedSystem(Graph.complete(n), ResponseField(response), pert, eps)


# --- fixed-point spaces --------------------------------------------------------

def test_cyclic_group_fixes_consensus_only():
    fix = fixed_point_space(PermutationGroup.cyclic(5), 5)
    assert fix.is_consensus and fix.dimension == 1


def test_reversal_on_path_clusters():
    group = PermutationGroup((Permutation.reversal(4),))
    fix = fixed_point_space(group, 4)
    assert fix.classes == (frozenset({1, 4}), frozenset({2, 3}))
    assert fix.dimension == 2


def test_trivial_group_fixes_everything():
    fix = fixed_point_space(PermutationGroup.trivial(3), 3)
    assert fix.dimension == 3


def test_symmetric_group_fixed_space_is_consensus():
    for n in (2, 4, 7):
        fix = fixed_point_space(PermutationGroup.symmetric(n), n)
        assert fix.is_consensus


@pytest.mark.parametrize(
    "group,n,order",
    [
        (PermutationGroup.cyclic(6), 6, 6),
        (PermutationGroup.dihedral(5), 5, 10),
        (PermutationGroup.symmetric(5), 5, 120),
    ],
)
def test_group_orders(group, n, order):
    assert group.order() == order
    assert group.order_at_least(n)
    # every sufficiently large standard group pins consensus
    assert fixed_point_space(group, n).is_consensus


def test_order_cap_raises():
    with pytest.raises(GroupEnumerationCapError):
        PermutationGroup.symmetric(8).order(cap=1000)
    # orbit computation is unaffected by the cap
    assert fixed_point_space(PermutationGroup.symmetric(8), 8).is_consensus


def test_group_closure_and_inverses():
    group = PermutationGroup.dihedral(4)
    elements = {p.image for p in group.elements()}
    for p in group.elements():
        assert p.inverse().image in elements
        for q in group.elements():
            assert p.compose(q).image in elements


# --- equivariance ---------------------------------------------------------------

def test_complete_graph_equivariance_exact(ex1_response):
    rng = SplitMix64(64)
    sys_ = _system(5, ex1_response)
    samples = [rational_state(rng, 5) for _ in range(10)]
    for _ in range(20):
        sigma = random_permutation(rng, 5)
        assert check_equivariance(sys_, sigma, samples, tol=0)


def test_path_graph_fails_equivariance():
    lap_path = Graph.path(3)
    sys_ = PerturbedSystem(
        lap_path, ResponseField(ResponseFunction.from_coeffs([0, 0, 1])), Perturbation.zero(3), 0
    )
    sigma = Permutation.transposition(3, 1, 2)
    assert not check_equivariance(sys_, sigma, [[Fraction(1), Fraction(2), Fraction(3)]], tol=1e-12)


def test_identity_is_always_a_symmetry(ex1_response):
    rng = SplitMix64(65)
    sys_ = _system(4, ex1_response, Perturbation.random_constant(4, 3, 0, 1), Fraction(1, 10))
    samples = [[rng.uniform(-1, 1) for _ in range(4)] for _ in range(5)]
    assert check_equivariance(sys_, Permutation.identity(4), samples, tol=0)


# --- sign-action equilibria -------------------------------------------------------

def test_sign_action_square_response():
    sys_ = _system(3, ResponseFunction.from_coeffs([0, 0, 1]))
    state, residual = symmetry_generated_equilibria(sys_, 2, [1, -1, 1])
    assert state == [2, -2, 2]
    assert residual == 0.0


def test_sign_action_all_plus_is_consensus(ex1_response):
    sys_ = _system(4, ex1_response)
    state, residual = symmetry_generated_equilibria(sys_, Fraction(3, 7), [1, 1, 1, 1])
    assert state == [Fraction(3, 7)] * 4
    assert residual == 0.0


def test_sign_action_mixed_signs_quartic(ex1_response):
    sys_ = _system(4, ex1_response)
    state, residual = symmetry_generated_equilibria(sys_, Fraction(7, 10), [1, -1, 1, -1])
    assert residual <= 1e-12
    # exact zero in rational arithmetic
    assert residual == 0.0


def test_sign_action_rejects_odd_response():
    sys_ = _system(3, ResponseFunction.from_coeffs([0, 0, 0, 1]))
    with pytest.raises(UnsupportedSymmetryError):
        symmetry_generated_equilibria(sys_, 1, [1, -1, 1])


# --- canard certificate ------------------------------------------------------------

def _certificate(sys_, group):
    rng = SplitMix64(90)
    samples = [rational_state(rng, sys_.n) for _ in range(5)]
    return maximal_canard_certificate(sys_, group, samples)


def test_certificate_uniform_perturbation(ex1_response):
    for n in (3, 10):
        sys_ = _system(n, ex1_response, Perturbation.constant(2, n), Fraction(1, 100))
        cert = _certificate(sys_, PermutationGroup.symmetric(n))
        assert cert.verdict


def test_certificate_fails_for_unequal_components(ex1_response):
    sys_ = _system(3, ex1_response, Perturbation.constant([1, 2, 1]), Fraction(1, 100))
    cert = _certificate(sys_, PermutationGroup.symmetric(3))
    assert not cert.perturbation_equivariant
    assert not cert.verdict


def test_certificate_fails_for_zero_perturbation(ex1_response):
    sys_ = _system(3, ex1_response, Perturbation.zero(3), Fraction(1, 100))
    cert = _certificate(sys_, PermutationGroup.symmetric(3))
    assert not cert.perturbation_nonzero
    assert not cert.verdict


def test_certificate_verdict_confirmed_by_integration(ex1_response):
    # the certified invariant line is checked by actually flowing along it
    sys_ = _system(3, ex1_response, Perturbation.constant(1, 3), Fraction(1, 50))
    cert = _certificate(sys_, PermutationGroup.symmetric(3))
    assert cert.verdict
    traj = integrate(sys_, [1.5] * 3, (0.0, 10.0), IntegratorConfig(dt=1e-3, stride=100))
    for state in traj.states:
        mean = sum(state) / 3
        assert max(abs(v - mean) for v in state) <= 1e-12


def test_group_json_round_trip():
    group = PermutationGroup.dihedral(4)
    payload = group.to_json()
    assert payload == {"generators": [[2, 3, 4, 1], [4, 3, 2, 1]]}
    again = PermutationGroup.from_json(payload)
    assert again.order() == group.order() == 8
