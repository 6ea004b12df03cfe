import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from planarsym.algebra import (
    FLIP,
    AdaptedNormError,
    InnerProduct2,
    adapted_inner_product,
    commutator_residual,
    eig2,
    rotation,
)

entries = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
matrices = st.tuples(entries, entries, entries, entries).map(lambda t: np.array(t).reshape(2, 2))


def unit_vectors(n=10_000, seed=7):
    t = np.random.default_rng(seed).uniform(0, 2 * np.pi, n)
    return np.column_stack([np.cos(t), np.sin(t)])


def sampled_ratio(a, g, xs):
    return g.norm(xs @ np.asarray(a).T) / g.norm(xs)


def test_eig2_diagonal():
    ep = eig2(np.diag([0.5, -0.5]))
    assert sorted([ep.lambda1.real, ep.lambda2.real]) == [-0.5, 0.5]
    assert not ep.defective


def test_eig2_quarter_rotation():
    ep = eig2([[0, -1], [1, 0]])
    assert {ep.lambda1, ep.lambda2} == {1j, -1j}


def test_eig2_jordan_block_is_defective():
    ep = eig2([[1, 1], [0, 1]])
    assert ep.lambda1 == ep.lambda2 == 1
    assert ep.defective


def test_eig2_scalar_not_defective():
    assert not eig2(2.5 * np.eye(2)).defective


@given(matrices)
def test_eig2_trace_det_identities(a):
    ep = eig2(a)
    tr, det = np.trace(a), np.linalg.det(a)
    scale = 1.0 + np.max(np.abs(a)) ** 2
    assert abs((ep.lambda1 + ep.lambda2) - tr) <= 1e-12 * scale
    assert abs(ep.lambda1 * ep.lambda2 - det) <= 1e-12 * scale


def test_commutator_residual_examples():
    assert commutator_residual(0.7 * np.eye(2), rotation(0.3)) == 0.0
    # expanding A M - M A by hand gives [[0, 1], [1, 0]]
    assert commutator_residual(np.diag([1.0, 2.0]), [[0, -1], [1, 0]]) == pytest.approx(1.0, abs=1e-15)
    assert commutator_residual(np.diag([0.3, -1.2]), FLIP) == 0.0


def test_adapted_scalar_gives_identity_gram():
    g = adapted_inner_product(0.5 * np.eye(2), 0.4, 0.6)
    np.testing.assert_array_equal(g.matrix, np.eye(2))
    r = sampled_ratio(0.5 * np.eye(2), g, unit_vectors(1000))
    assert np.all(r == 0.5)


def test_adapted_defective_large_shear():
    a = np.array([[0.9, 10.0], [0.0, 0.9]])
    g = adapted_inner_product(a, 0.85, 0.95)
    r = sampled_ratio(a, g, unit_vectors())
    assert r.max() <= 0.95
    assert r.min() >= 0.85


def test_adapted_complex_pair_constant_ratio():
    a = np.array([[0.3, -0.4], [0.4, 0.3]])
    g = adapted_inner_product(a, 0.45, 0.55)
    r = sampled_ratio(a, g, unit_vectors())
    # |lambda|^2 = 0.09 + 0.16
    assert np.max(np.abs(r - 0.5)) <= 1e-12


def test_adapted_symmetric_reproduces_spectral_radius():
    a = np.array([[0.6, 0.2], [0.2, 0.3]])
    rho = max(abs(np.linalg.eigvalsh(a)))
    g = adapted_inner_product(a, 0.1, 0.9)
    lo, hi = g.gain_bounds(a)
    assert abs(hi - rho) <= 1e-10
    assert abs(lo - min(abs(np.linalg.eigvalsh(a)))) <= 1e-10
    assert sampled_ratio(a, g, unit_vectors()).max() <= rho * (1 + 1e-12)


def test_adapted_rejects_bad_bounds_and_names_eigenvalue():
    with pytest.raises(AdaptedNormError, match="beta"):
        adapted_inner_product(np.diag([0.5, 0.9]), 0.4, 0.8)
    with pytest.raises(AdaptedNormError, match="alpha"):
        adapted_inner_product(np.diag([0.5, 0.9]), 0.6, 0.95)
    with pytest.raises(AdaptedNormError):
        adapted_inner_product(np.diag([0.5, 0.9]), 0.0, 0.95)


def test_inner_product_rejects_indefinite():
    with pytest.raises(ValueError):
        InnerProduct2(1.0, 2.0, 1.0)


@settings(max_examples=150, deadline=None)
@given(matrices, st.floats(0.05, 0.5), st.floats(0.05, 0.5))
def test_adapted_norm_pinches_for_valid_inputs(a, lo_gap, hi_gap):
    mods = sorted(abs(l) for l in np.linalg.eigvals(a))
    assume(mods[0] > 1e-3)
    # keep away from nearly coincident distinct eigenvalues, where bases are ill conditioned
    lam = np.linalg.eigvals(a)
    assume(abs(lam[0] - lam[1]) > 1e-4 or eig2(a).defective or np.allclose(a, a[0, 0] * np.eye(2)))
    alpha = mods[0] * (1 - lo_gap)
    beta = mods[1] * (1 + hi_gap)
    g = adapted_inner_product(a, alpha, beta)
    assert g.g11 > 0 and g.g11 * g.g22 - g.g12**2 > 0
    r = sampled_ratio(a, g, unit_vectors(10_000, seed=3))
    assert r.min() >= alpha * (1 - 1e-9)
    assert r.max() <= beta * (1 + 1e-9)


def test_rotation_is_orthogonal():
    for t in (0.1, 1.0, math.pi / 3):
        r = rotation(t)
        np.testing.assert_allclose(r.T @ r, np.eye(2), atol=1e-15)


def test_defective_near_zero_eigenvalue_fails_cleanly():
    from planarsym.algebra import AdaptedNormError, adapted_inner_product

    with pytest.raises(AdaptedNormError):
        # repeated eigenvalue ~1e-243: the nilpotent scaling underflows
        adapted_inner_product([[1.995700463454592e-243, 0.0], [0.5, 0.0]], 4.9e-244, 0.5)
