import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarsym.algebra import FLIP, rotation
from planarsym.groups import O2, SO2, TRIVIAL, Z2KAPPA, GroupSpec, cyclic, dihedral
from planarsym.maps import MapSpec
from planarsym.symmetry import (
    DEFAULT_GRID,
    EquivarianceMode,
    HalfPlaneVerdict,
    RayBehavior,
    check_equivariance,
    check_equivariance_exact,
    check_equivariance_sampled,
    detect_symmetry_group,
    flip_axis_invariance,
    interchanges_half_planes,
)


def test_exact_examples():
    assert check_equivariance_exact(MapSpec.cpoly({(1, 0): 0.5}), O2).holds
    rep = check_equivariance_exact(MapSpec.cpoly({(1, 0): 0.5, (0, 2): 0.1}), dihedral(3))
    assert rep.holds and rep.mode is EquivarianceMode.EXACT and rep.max_residual == 0.0
    rep = check_equivariance_exact(MapSpec.cpoly({(1, 0): 0.5 + 0.2j}), Z2KAPPA)
    assert rep.verdict == "Fails" and rep.witness is not None and rep.max_residual > 0


def test_exact_fail_witness_is_genuine():
    m = MapSpec.cpoly({(1, 0): 0.5 + 0.2j})
    rep = check_equivariance_exact(m, Z2KAPPA)
    el = np.array(rep.element).reshape(2, 2)
    p = np.array(rep.witness)
    assert np.linalg.norm(m(el @ p) - el @ m(p)) > 1e-3


def test_reject_expression_in_exact_mode():
    with pytest.raises(TypeError):
        check_equivariance_exact(MapSpec.expr("x", "y"), O2)


def test_sampled_examples(figure1):
    rep = check_equivariance_sampled(figure1, dihedral(2))
    assert rep.holds and rep.max_residual < 1e-12
    rep = check_equivariance_sampled(figure1, dihedral(4))
    assert not rep.holds and rep.witness is not None
    assert not check_equivariance_sampled(MapSpec.expr("x + y", "y^2"), Z2KAPPA).holds


def test_d4_residual_at_derived_witness(figure1):
    g = rotation(math.pi / 2)
    p = np.array([1.0, 1.0])
    diff = figure1(g @ p) - g @ figure1(p)
    np.testing.assert_allclose(diff, [0.5, 0.5], atol=1e-15)
    assert np.linalg.norm(diff) == pytest.approx(math.sqrt(2) / 2)


def test_sampled_domain_error_reported():
    rep = check_equivariance_sampled(MapSpec.expr("sqrt(x)", "y"), dihedral(2))
    assert not rep.holds and rep.note == "evaluation domain error" and rep.witness is not None


def test_detect_examples(figure1):
    assert detect_symmetry_group(figure1) == dihedral(2)
    assert detect_symmetry_group(MapSpec.cpoly({(1, 0): 0.5, (0, 2): 0.1})) == dihedral(3)
    assert detect_symmetry_group(MapSpec.expr("x + y", "y^2")) == TRIVIAL
    assert detect_symmetry_group(MapSpec.cpoly({(1, 0): 0.5})) == O2
    assert detect_symmetry_group(MapSpec.cpoly({(1, 0): 0.5j})) == SO2
    assert detect_symmetry_group(MapSpec.cpoly({(1, 0): 0.1j, (0, 2): 1})) == cyclic(3)
    assert detect_symmetry_group(MapSpec.cpoly({(2, 0): 1.0})) == Z2KAPPA
    with pytest.raises(ValueError):
        detect_symmetry_group(figure1, n_max=1)


def test_n_max_limits_detection():
    m = MapSpec.cpoly({(1, 0): 0.5, (0, 6): 0.1})  # 0 - 6 = -6 = 1 mod 7
    assert detect_symmetry_group(m, n_max=12) == dihedral(7)
    assert detect_symmetry_group(m, n_max=6) == Z2KAPPA


def test_exact_and_sampled_agree_on_polynomials(corpus):
    groups = [O2, SO2, Z2KAPPA] + [dihedral(n) for n in range(2, 7)] + [cyclic(n) for n in range(2, 7)]
    for m in corpus:
        if not m.is_polynomial:
            continue
        for g in groups:
            ex = check_equivariance_exact(m, g)
            sa = check_equivariance_sampled(m, g, DEFAULT_GRID, 1e-9)
            assert ex.holds == sa.holds, (m.name, str(g))


def test_detected_group_implies_components(corpus):
    for m in corpus:
        g = detect_symmetry_group(m)
        if g.family == "Dn":
            assert check_equivariance(m, cyclic(g.n)).holds
            assert check_equivariance(m, Z2KAPPA).holds
        if g.family == "O2":
            assert check_equivariance(m, SO2).holds
            assert check_equivariance(m, Z2KAPPA).holds


_coef = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=4), _coef)
def test_modular_criterion_is_sufficient(n, monos, c):
    terms = {}
    for j, k in monos:
        # shift j so that j - k = 1 mod n
        j2 = k + 1 + n * ((j + k) // n)
        terms[(j2, k)] = c
    m = MapSpec.cpoly(terms)
    assert check_equivariance_exact(m, cyclic(n)).holds
    assert check_equivariance_sampled(m, cyclic(n), tol=1e-9).holds


def test_flip_axis_examples(figure1):
    rep = flip_axis_invariance(figure1)
    assert rep.invariant and rep.rays is RayBehavior.SWAPS_RAYS
    rep = flip_axis_invariance(MapSpec.expr("x/2", "-y/2"))
    assert rep.invariant and rep.rays is RayBehavior.PRESERVES_EACH_RAY
    sq = MapSpec.expr("x^2", "y")
    assert check_equivariance_sampled(sq, Z2KAPPA).holds
    rep = flip_axis_invariance(sq)
    assert rep.invariant and rep.rays is RayBehavior.PRESERVES_EACH_RAY


def test_flip_axis_broken():
    rep = flip_axis_invariance(MapSpec.expr("x", "y + x/10"))
    assert not rep.invariant and rep.witnesses
    rep = flip_axis_invariance(MapSpec.expr("x - x^2", "y/2"))
    assert not rep.invariant and len(rep.witnesses) >= 2


def test_kappa_polynomials_keep_axis_exactly(corpus):
    for m in corpus:
        if check_equivariance(m, Z2KAPPA).holds:
            xs = np.linspace(-3, 3, 61)
            _, v = m.evaluate(xs, np.zeros_like(xs))
            if m.is_polynomial:
                assert np.all(v == 0.0)
            else:
                assert np.max(np.abs(v)) <= 1e-10


def test_half_plane_examples(figure1):
    assert interchanges_half_planes(MapSpec.expr("x/2", "-y/2")).verdict is HalfPlaneVerdict.SWAPS
    assert interchanges_half_planes(figure1).verdict is HalfPlaneVerdict.SWAPS
    assert interchanges_half_planes(MapSpec.expr("x/2", "y/2")).verdict is HalfPlaneVerdict.PRESERVES
    rep = interchanges_half_planes(MapSpec.expr("x", "y*(x - 1)"))
    assert rep.verdict is HalfPlaneVerdict.INCONSISTENT and rep.witness[1] > 0


def test_flip_generator_is_kappa():
    np.testing.assert_array_equal(FLIP, [[1, 0], [0, -1]])
    assert str(GroupSpec.parse("Z2k")) == "Z2k"
