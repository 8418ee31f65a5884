import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ym2d.groups import (
    ConjClass,
    GroupElement,
    GroupId,
    GroupMismatchError,
    Irrep,
    character,
    character_values,
    class_angle_of,
    conj_class,
    element_from_class,
    haar_array,
    haar_sample,
    integrate_class_function,
    inverse,
    irrep_enumerate,
    multiply,
    quadrature_nodes,
    verify_character_identities,
)

GROUPS = [GroupId.U1, GroupId.SU2, GroupId.SO3]


def test_parse_group_ids():
    assert GroupId.parse("SU2") is GroupId.SU2
    assert GroupId.parse(GroupId.U1) is GroupId.U1
    with pytest.raises(ValueError):
        GroupId.parse("su3")


@pytest.mark.parametrize(
    "group,label,dim,cas",
    [
        (GroupId.U1, -3, 1, 9.0),
        (GroupId.SU2, 1, 2, 0.75),
        (GroupId.SU2, 2, 3, 2.0),
        (GroupId.SO3, 1, 3, 2.0),
        (GroupId.SO3, 2, 5, 6.0),
    ],
)
def test_dim_and_casimir(group, label, dim, cas):
    r = Irrep(group, label)
    assert r.dim == dim
    assert r.casimir == pytest.approx(cas)


def test_su2_fundamental_character_at_pi_over_3():
    # half-angle pi/3 gives trace 2 cos(pi/3) = 1
    assert character(Irrep(GroupId.SU2, 1), ConjClass(GroupId.SU2, math.pi / 3)).real == pytest.approx(1.0, abs=1e-14)


def test_characters_at_identity_equal_dimension():
    for g in GROUPS:
        for r in irrep_enumerate(g, 30.0):
            assert character(r, ConjClass.identity(g)) == pytest.approx(r.dim, abs=1e-12)


def test_character_near_singular_points_is_smooth():
    eps = np.array([0.0, 1e-9, 1e-7, 1e-5, 1e-3])
    for m in range(0, 6):
        near0 = character_values(GroupId.SU2, m, eps)
        assert np.allclose(near0, (m + 1) * np.ones_like(eps), atol=1e-5 * (m + 1) ** 3)
        nearpi = character_values(GroupId.SU2, m, math.pi - eps)
        assert np.allclose(nearpi, (-1) ** m * (m + 1) * np.ones_like(eps), atol=1e-5 * (m + 1) ** 3)


def test_irrep_enumeration_sorted_by_casimir():
    reps = irrep_enumerate(GroupId.U1, 10.0)
    assert [r.label for r in reps] == [0, -1, 1, -2, 2, -3, 3]
    cas = [r.casimir for r in irrep_enumerate(GroupId.SU2, 50.0)]
    assert cas == sorted(cas)


@pytest.mark.parametrize("group", GROUPS)
def test_orthonormality_by_quadrature(group):
    labels = [r.label for r in irrep_enumerate(group, 40.0)]
    angles, w = quadrature_nodes(group, 256)
    for a in labels:
        for b in labels:
            val = np.sum(w * character_values(group, a, angles) * np.conj(character_values(group, b, angles)))
            assert abs(val - (a == b)) < 1e-12


@pytest.mark.parametrize("group", GROUPS)
def test_quadrature_weights_sum_to_one(group):
    _, w = quadrature_nodes(group, 64)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("group", GROUPS)
def test_haar_class_angle_distribution_matches_weyl_density(group, rng):
    # E chi_1 under Haar is 0 for every nontrivial irrep
    x = haar_array(group, 200_000, rng)
    from ym2d.groups import class_angles_array

    chi = character_values(group, 1, class_angles_array(group, x))
    assert abs(chi.mean()) < 5 * math.sqrt(np.mean(np.abs(chi) ** 2) / chi.size)


def test_group_mismatch(rng):
    with pytest.raises(GroupMismatchError):
        multiply(haar_sample(GroupId.U1, rng), haar_sample(GroupId.SU2, rng))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2), st.integers(0, 10_000))
def test_inverse_and_associativity(gi, seed):
    group = GROUPS[gi]
    rng = np.random.default_rng(seed)
    a, b, c = (haar_sample(group, rng) for _ in range(3))
    assert multiply(a, inverse(a)).close_to(GroupElement.identity(group), 1e-12)
    assert multiply(multiply(a, b), c).close_to(multiply(a, multiply(b, c)), 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2), st.integers(0, 10_000))
def test_class_is_conjugation_invariant(gi, seed):
    group = GROUPS[gi]
    rng = np.random.default_rng(seed)
    x, y = haar_sample(group, rng), haar_sample(group, rng)
    z = multiply(multiply(y, x), inverse(y))
    a1, a2 = conj_class(x).angle, conj_class(z).angle
    if group is GroupId.U1:
        assert min(abs(a1 - a2), 2 * math.pi - abs(a1 - a2)) < 1e-10
    else:
        assert a1 == pytest.approx(a2, abs=1e-6)


@pytest.mark.parametrize("group", GROUPS)
def test_element_from_class_round_trip(group):
    for a in (0.0, 0.4, 1.3, 2.9):
        c = ConjClass(group, a)
        assert class_angle_of(group, element_from_class(c).data) == pytest.approx(a, abs=1e-12)


def test_so3_rotation_angle_from_quaternion():
    # a quaternion with half angle 0.3 is a rotation by 0.6
    q = (math.cos(0.3), math.sin(0.3), 0.0, 0.0)
    assert class_angle_of(GroupId.SO3, q) == pytest.approx(0.6)
    # -q is the same rotation
    assert class_angle_of(GroupId.SO3, tuple(-v for v in q)) == pytest.approx(0.6)


def test_integrate_class_function_volume():
    for g in GROUPS:
        assert integrate_class_function(g, lambda a: np.ones_like(a)).real == pytest.approx(1.0)


@pytest.mark.parametrize("label", [1, 2])
def test_character_identities_su2(label, rng):
    rep = verify_character_identities(Irrep(GroupId.SU2, label), 20_000, rng)
    assert rep.passed, rep.checks


def test_character_identities_requires_samples(rng):
    with pytest.raises(ValueError):
        verify_character_identities(Irrep(GroupId.SU2, 1), 10, rng)
