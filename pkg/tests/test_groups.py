import itertools

import numpy as np
import pytest

from planarsym.groups import (
    O2,
    SO2,
    TRIVIAL,
    Z2KAPPA,
    GroupSpec,
    SubspaceKind,
    contains_flip,
    cyclic,
    dihedral,
    fixed_point_subspace,
    generators,
    sample_elements,
)

ALL_GROUPS = [O2, SO2, Z2KAPPA, TRIVIAL] + [dihedral(n) for n in (2, 3, 4, 7)] + [cyclic(n) for n in (2, 3, 5, 6)]
FINITE = [g for g in ALL_GROUPS if not g.is_continuous]


def test_generators_flip_group():
    gens = generators(Z2KAPPA)
    assert not gens.continuous_rotation
    np.testing.assert_array_equal(gens.matrices[0], np.diag([1.0, -1.0]))


def test_generators_d2_is_minus_identity_and_flip():
    rot, flip = generators(dihedral(2)).matrices
    np.testing.assert_array_equal(rot, -np.eye(2))
    np.testing.assert_array_equal(flip, np.diag([1.0, -1.0]))


def test_generators_z4_quarter_turn():
    (rot,) = generators(cyclic(4)).matrices
    np.testing.assert_array_equal(rot, [[0.0, -1.0], [1.0, 0.0]])


def test_generators_continuous_marker():
    assert generators(SO2).continuous_rotation and generators(SO2).matrices == []
    assert generators(O2).continuous_rotation and len(generators(O2).matrices) == 1
    assert generators(TRIVIAL) == ([], False)


@pytest.mark.parametrize("g", ALL_GROUPS, ids=str)
def test_every_generator_is_orthogonal(g):
    for m in generators(g).matrices + sample_elements(g, 8):
        np.testing.assert_allclose(m.T @ m, np.eye(2), atol=1e-14)


def test_sample_sizes():
    assert len(sample_elements(dihedral(3), 5)) == 6
    assert len(sample_elements(cyclic(5))) == 5
    assert len(sample_elements(Z2KAPPA)) == 2
    assert sample_elements(TRIVIAL) == []
    rots = sample_elements(SO2, 8)
    assert len(rots) == 8
    for k, r in enumerate(rots):
        t = 2 * np.pi * k / 8
        np.testing.assert_allclose(r, [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], atol=1e-15)
    assert len(sample_elements(O2, 8)) == 16


def _index(m, elements):
    for i, e in enumerate(elements):
        if np.max(np.abs(m - e)) < 1e-12:
            return i
    return None


@pytest.mark.parametrize("g", FINITE, ids=str)
def test_finite_groups_closed_under_product_and_inverse(g):
    els = sample_elements(g)
    if not els:
        return
    for a, b in itertools.product(els, els):
        assert _index(a @ b, els) is not None
    for a in els:
        assert _index(np.linalg.inv(a), els) is not None


def test_contains_flip():
    assert contains_flip(O2) and contains_flip(Z2KAPPA) and contains_flip(dihedral(5))
    assert not contains_flip(SO2) and not contains_flip(cyclic(3)) and not contains_flip(TRIVIAL)


def test_fixed_subspace_of_flip_element():
    d = fixed_point_subspace(np.diag([1.0, -1.0]))
    assert d.kind is SubspaceKind.LINE and d.direction == (1.0, 0.0)


def test_fixed_subspace_of_groups():
    assert fixed_point_subspace(dihedral(3)).kind is SubspaceKind.ORIGIN_ONLY
    assert fixed_point_subspace(TRIVIAL).kind is SubspaceKind.PLANE
    assert fixed_point_subspace(Z2KAPPA).kind is SubspaceKind.LINE
    assert fixed_point_subspace(np.eye(2)).kind is SubspaceKind.PLANE


@pytest.mark.parametrize("g", ALL_GROUPS, ids=str)
def test_fixed_subspace_is_pointwise_fixed(g):
    d = fixed_point_subspace(g)
    rng = np.random.default_rng(1)
    if d.kind is SubspaceKind.PLANE:
        pts = rng.normal(size=(20, 2))
    elif d.kind is SubspaceKind.LINE:
        pts = rng.normal(size=(20, 1)) * np.array(d.direction)
    else:
        pts = np.zeros((1, 2))
    for m in sample_elements(g, 12):
        assert np.max(np.abs(pts @ m.T - pts)) < 1e-12


@pytest.mark.parametrize("text", ["O2", "SO2", "D:3", "Z:5", "Z2k", "trivial", "D:2"])
def test_parse_round_trip(text):
    assert str(GroupSpec.parse(text)) == text


@pytest.mark.parametrize("bad", ["D:1", "Z:x", "Q8", "D", ""])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        GroupSpec.parse(bad)


def test_groupspec_validation():
    with pytest.raises(ValueError):
        GroupSpec("Dn")
    with pytest.raises(ValueError):
        GroupSpec("O2", 3)
