"""Equivariance checks, symmetry-group detection and flip-axis behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .algebra import FLIP, rotation
from .groups import (
    GroupSpec,
    O2,
    SO2,
    TRIVIAL,
    Z2KAPPA,
    cyclic,
    dihedral,
    sample_elements,
)
from .maps import ComplexPolyMap, MapSpec

GENERIC_ANGLES = (1.0, math.sqrt(2.0), math.e)


class EquivarianceMode(str, Enum):
    EXACT = "Exact"
    SAMPLED = "Sampled"


@dataclass(frozen=True)
class EquivarianceReport:
    group: GroupSpec
    mode: EquivarianceMode
    max_residual: float
    holds: bool
    witness: Optional[tuple] = None
    element: Optional[tuple] = None
    note: str = ""

    @property
    def verdict(self) -> str:
        return "Holds" if self.holds else "Fails"


@dataclass(frozen=True)
class SamplingGrid:
    """Deterministic point cloud used by the sampled checks."""

    n_random: int = 200
    radius: float = 2.0
    n_circle: int = 32
    seed: int = 42
    resolution: int = 16

    def points(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        r = self.radius * np.sqrt(rng.random(self.n_random))
        t = rng.uniform(0.0, 2 * np.pi, self.n_random)
        ang = 2 * np.pi * np.arange(self.n_circle) / max(self.n_circle, 1)
        return np.vstack(
            [np.column_stack([r * np.cos(t), r * np.sin(t)]), np.column_stack([np.cos(ang), np.sin(ang)])]
        )


DEFAULT_GRID = SamplingGrid()


def _exact_rotation_ok(items, n) -> bool:
    """Every nonzero term satisfies ``j - k = 1`` (``n=None``) or ``j - k = 1 mod n``."""
    for (j, k), c in items:
        if c == 0:
            continue
        d = j - k - 1
        if (d != 0) if n is None else (d % n != 0):
            return False
    return True


def _exact_flip_ok(items) -> bool:
    return all(c.imag == 0.0 for _, c in items)


def exact_criterion(poly: ComplexPolyMap, g: GroupSpec) -> bool:
    items = poly.items()
    fam = g.family
    if fam == "Trivial":
        return True
    if fam == "Z2kappa":
        return _exact_flip_ok(items)
    if fam == "SO2":
        return _exact_rotation_ok(items, None)
    if fam == "O2":
        return _exact_rotation_ok(items, None) and _exact_flip_ok(items)
    if fam == "Zn":
        return _exact_rotation_ok(items, g.n)
    return _exact_rotation_ok(items, g.n) and _exact_flip_ok(items)


def _elements(g: GroupSpec, resolution: int) -> list:
    els = sample_elements(g, resolution)
    if g.is_continuous:
        extra = [rotation(a) for a in GENERIC_ANGLES]
        if g.family == "O2":
            extra += [r @ FLIP for r in extra]
        els = els + extra
    return els


def _sampled(m: MapSpec, g: GroupSpec, grid: SamplingGrid, tol: float) -> EquivarianceReport:
    pts = grid.points()
    fp = m.evaluate_points(pts, strict=False)
    worst, w_pt, w_el = 0.0, None, None
    for el in _elements(g, grid.resolution):
        gp = pts @ el.T
        lhs = m.evaluate_points(gp, strict=False)
        rhs = fp @ el.T
        with np.errstate(invalid="ignore"):
            res = np.hypot(*(lhs - rhs).T) / (1.0 + np.hypot(*fp.T))
        bad = ~np.isfinite(res)
        if bad.any():
            i = int(np.argmax(bad))
            return EquivarianceReport(
                g, EquivarianceMode.SAMPLED, math.inf, False,
                tuple(map(float, pts[i])), tuple(map(float, el.ravel())), "evaluation domain error",
            )
        i = int(np.argmax(res))
        if res[i] > worst:
            worst, w_pt, w_el = float(res[i]), pts[i], el
    holds = worst <= tol
    if holds:
        return EquivarianceReport(g, EquivarianceMode.SAMPLED, worst, True)
    return EquivarianceReport(
        g, EquivarianceMode.SAMPLED, worst, False,
        tuple(map(float, w_pt)), tuple(map(float, w_el.ravel())),
    )


def check_equivariance_exact(m, g: GroupSpec) -> EquivarianceReport:
    """Coefficient-level test for a complex polynomial (``MapSpec`` or ``ComplexPolyMap``).

    On failure a witness point and group element are located by sampling.
    """
    poly = m.form if isinstance(m, MapSpec) else m
    if not isinstance(poly, ComplexPolyMap):
        raise TypeError("exact equivariance needs a complex-polynomial map")
    if exact_criterion(poly, g):
        return EquivarianceReport(g, EquivarianceMode.EXACT, 0.0, True)
    spec = m if isinstance(m, MapSpec) else MapSpec("cpoly", poly)
    probe = _sampled(spec, g, DEFAULT_GRID, 0.0)
    return EquivarianceReport(
        g, EquivarianceMode.EXACT, probe.max_residual, False, probe.witness, probe.element,
        "coefficient criterion violated",
    )


def check_equivariance_sampled(
    m: MapSpec, g: GroupSpec, grid: SamplingGrid = DEFAULT_GRID, tol: float = 1e-9
) -> EquivarianceReport:
    """Max of ``|f(gp) - g f(p)| / (1 + |f(p)|)`` over the grid and group sample."""
    return _sampled(m, g, grid, tol)


def check_equivariance(m: MapSpec, g: GroupSpec, tol: float = 1e-9) -> EquivarianceReport:
    if m.is_polynomial:
        return check_equivariance_exact(m, g)
    return check_equivariance_sampled(m, g, tol=tol)


def candidate_groups(n_max: int = 12) -> list:
    """Canonical groups from largest to smallest in detection order."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    return (
        [O2, SO2]
        + [dihedral(n) for n in range(n_max, 1, -1)]
        + [cyclic(n) for n in range(n_max, 1, -1)]
        + [Z2KAPPA]
    )


def detect_symmetry_group(m: MapSpec, n_max: int = 12, tol: float = 1e-9) -> GroupSpec:
    """Largest canonical group under which ``m`` is equivariant; ``Trivial`` otherwise."""
    for g in candidate_groups(n_max):
        if check_equivariance(m, g, tol).holds:
            return g
    return TRIVIAL


# ---------------------------------------------------------------- flip axis


class RayBehavior(str, Enum):
    PRESERVES_EACH_RAY = "preserves_each_ray"
    SWAPS_RAYS = "swaps_rays"


@dataclass(frozen=True)
class FlipAxisReport:
    invariant: bool
    rays: Optional[RayBehavior]
    max_residual: float
    witnesses: list = field(default_factory=list)


def _axis_samples(radius: float, n: int) -> np.ndarray:
    return np.geomspace(1e-6 * radius, radius, n)


def flip_axis_invariance(
    m: MapSpec, tol: float = 1e-10, radius: float = 4.0, n: int = 201
) -> FlipAxisReport:
    """Is the x-axis invariant, and does ``f`` keep or swap its two open rays?"""
    xs = _axis_samples(radius, n)
    xs = np.concatenate([-xs[::-1], xs])
    u, v = m.evaluate(xs, np.zeros_like(xs), strict=False)
    scale = 1.0 + np.hypot(u, v)
    with np.errstate(invalid="ignore"):
        res = np.abs(v) / scale
    if m.is_polynomial and all(c.imag == 0.0 for _, c in m.form.items()):
        res = np.zeros_like(res)
    finite = np.isfinite(res) & np.isfinite(u)
    worst = float(np.max(res[finite])) if finite.any() else math.inf
    if not finite.all() or worst > tol:
        i = int(np.argmax(np.where(finite, res, np.inf)))
        return FlipAxisReport(False, None, worst, [(float(xs[i]), 0.0)])
    pos = xs > 0
    signs = np.sign(u[pos])
    if np.all(signs > 0):
        return FlipAxisReport(True, RayBehavior.PRESERVES_EACH_RAY, worst)
    if np.all(signs < 0):
        return FlipAxisReport(True, RayBehavior.SWAPS_RAYS, worst)
    wit = []
    for s in (1.0, -1.0, 0.0):
        hit = np.flatnonzero(signs == s)
        if hit.size:
            wit.append((float(xs[pos][hit[0]]), 0.0))
    return FlipAxisReport(False, None, worst, wit)


class HalfPlaneVerdict(str, Enum):
    PRESERVES = "preserves"
    SWAPS = "swaps"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class HalfPlaneReport:
    verdict: HalfPlaneVerdict
    witness: Optional[tuple] = None


def upper_half_samples(n: int = 400, radius: float = 4.0, seed: int = 42) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    t = rng.uniform(0.0, np.pi, n)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    return pts[pts[:, 1] > 0]


def interchanges_half_planes(
    m: MapSpec, n: int = 400, radius: float = 4.0, seed: int = 42
) -> HalfPlaneReport:
    """Sign of ``f_2`` on the open upper half-plane: unanimous, or a mixed witness."""
    pts = upper_half_samples(n, radius, seed)
    _, v = m.evaluate(pts[:, 0], pts[:, 1], strict=False)
    if np.all(v > 0):
        return HalfPlaneReport(HalfPlaneVerdict.PRESERVES)
    if np.all(v < 0):
        return HalfPlaneReport(HalfPlaneVerdict.SWAPS)
    # report a point whose image disagrees with the majority (or is undefined)
    majority = 1.0 if np.sum(v > 0) >= np.sum(v < 0) else -1.0
    odd = ~(np.sign(v) == majority)
    i = int(np.argmax(odd))
    return HalfPlaneReport(HalfPlaneVerdict.INCONSISTENT, (float(pts[i, 0]), float(pts[i, 1])))
