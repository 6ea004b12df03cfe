import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarsym import kernels
from planarsym.maps import MapSpec

from conftest import bundled, extra_maps

ckernels = pytest.importorskip("planarsym._ckernels")
PY = kernels.get_backend("python")
CY = kernels.get_backend("cython")

MAPS = [bundled(n) for n in ("figure1", "linear_d2", "repellor_d2", "so2_radial", "z3_rotscale")] + extra_maps() + [
    MapSpec.expr("sqrt(x) - 1", "y/2", name="domain"),
    MapSpec.expr("exp(x) - 1 + tanh(y)", "cos(x)*y - abs(y)/3", name="transcendental"),
]
ORBIT_ARGS = (400, 1e6, 1e-8, 1e-9, 20, 10)


def _pts(n, seed, r=2.5):
    rng = np.random.default_rng(seed)
    return rng.uniform(-r, r, size=(n, 2))


@pytest.mark.skipif(os.environ.get("PLANARSYM_BACKEND") == "python", reason="pure backend forced")
def test_active_backend_is_compiled():
    assert kernels.BACKEND == "cython"
    assert kernels.get_backend() is CY
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("m", MAPS, ids=lambda m: m.name)
def test_eval_parity(m):
    pts = _pts(200, 1)
    out_py = PY.eval_points(kernels.compile_map(m, PY), pts[:, 0].copy(), pts[:, 1].copy())
    out_cy = CY.eval_points(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy())
    for a, b in zip(out_py, out_cy):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("m", MAPS, ids=lambda m: m.name)
def test_orbit_parity(m):
    pts = _pts(100, 2)
    out_py = PY.classify_orbits(kernels.compile_map(m, PY), pts[:, 0].copy(), pts[:, 1].copy(), *ORBIT_ARGS)
    out_cy = CY.classify_orbits(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy(), *ORBIT_ARGS)
    for a, b in zip(out_py, out_cy):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("m", MAPS[:6], ids=lambda m: m.name)
def test_probe_and_trajectory_parity(m):
    pts = _pts(40, 3, 12.0)
    a = PY.trap_probe(kernels.compile_map(m, PY), pts[:, 0].copy(), pts[:, 1].copy(), 100, 5.0, 1e6)
    b = CY.trap_probe(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy(), 100, 5.0, 1e6)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
    a = PY.trajectories(kernels.compile_map(m, PY), pts[:, 0].copy(), pts[:, 1].copy(), 30)
    b = CY.trajectories(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy(), 30)
    np.testing.assert_array_equal(a, b)


_c = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), _c, min_size=1, max_size=4),
       st.integers(0, 2**16))
def test_random_polynomial_parity(terms, seed):
    m = MapSpec.cpoly(terms)
    pts = _pts(30, seed, 1.5)
    a = PY.classify_orbits(kernels.compile_map(m, PY), pts[:, 0].copy(), pts[:, 1].copy(), *ORBIT_ARGS)
    b = CY.classify_orbits(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy(), *ORBIT_ARGS)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


def test_kernel_matches_numpy_evaluator():
    for m in MAPS[:-2]:
        pts = _pts(100, 4)
        u, v, err = CY.eval_points(kernels.compile_map(m, CY), pts[:, 0].copy(), pts[:, 1].copy())
        ref = m.evaluate_points(pts, strict=False)
        ok = err == 0
        np.testing.assert_allclose(np.column_stack([u, v])[ok], ref[ok], rtol=1e-13, atol=1e-13)


def test_env_var_forces_pure_backend():
    import subprocess
    import sys

    env = {**os.environ, "PLANARSYM_BACKEND": "python"}
    proc = subprocess.run([sys.executable, "-c", "import planarsym; print(planarsym.BACKEND)"],
                          capture_output=True, text=True, env=env, check=True)
    assert proc.stdout.strip() == "python"
