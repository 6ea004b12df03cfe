"""Forward-orbit machinery: limit classification, periodic points, probes, radial maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .maps import MapSpec


class OrbitKind(str, Enum):
    TO_FIXED = "ToFixed"
    TO_INFINITY = "ToInfinity"
    PERIODIC = "Periodic"
    UNRESOLVED = "Unresolved"


_KIND_OF_CODE = {
    kernels.TO_FIXED: OrbitKind.TO_FIXED,
    kernels.TO_INFINITY: OrbitKind.TO_INFINITY,
    kernels.PERIODIC: OrbitKind.PERIODIC,
    kernels.UNRESOLVED: OrbitKind.UNRESOLVED,
}
_NOTES = {
    kernels.NOTE_NONE: "",
    kernels.NOTE_DOMAIN: "evaluation domain error",
    kernels.NOTE_NONFINITE: "non-finite iterate",
    kernels.NOTE_MAXITER: "iteration cap reached",
}


@dataclass(frozen=True)
class OrbitConfig:
    max_iter: int = 10_000
    r_esc: float = 1e6
    r_fix: float = 1e-8
    cycle_tol: float = 1e-9
    fix_run: int = 20
    esc_run: int = 10

    def __post_init__(self):
        if self.max_iter < 1 or self.fix_run < 1 or self.esc_run < 1:
            raise ValueError("iteration caps must be positive")
        if not (self.r_esc > 0 and self.r_fix > 0 and self.cycle_tol > 0):
            raise ValueError("radii and tolerances must be positive")


DEFAULT_ORBIT = OrbitConfig()


@dataclass(frozen=True)
class OrbitClass:
    kind: OrbitKind
    iterations: int
    seed: tuple
    final: tuple
    period: int = 0
    cycle: tuple = ()
    note: str = ""

    @property
    def limit(self) -> Optional[tuple]:
        return self.final if self.kind is OrbitKind.TO_FIXED else None

    def converges_to_origin(self, tol: float = 1e-6) -> bool:
        return self.kind is OrbitKind.TO_FIXED and math.hypot(*self.final) <= tol

    def to_dict(self) -> dict:
        out = {
            "seed": list(self.seed),
            "class": self.kind.value,
            "period": self.period,
            "iterations": self.iterations,
            "final": list(self.final),
        }
        if self.cycle:
            out["cycle"] = [list(c) for c in self.cycle]
        if self.note:
            out["note"] = self.note
        return out


def _points(pts) -> np.ndarray:
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def _cycle(cm, backend, start, period) -> tuple:
    pts = [(float(start[0]) + 0.0, float(start[1]) + 0.0)]
    x, y = np.array([start[0]]), np.array([start[1]])
    for _ in range(period - 1):
        x, y, _e = backend.eval_points(cm, x, y)
        pts.append((float(x[0]) + 0.0, float(y[0]) + 0.0))
    return tuple(pts)


def classify_orbits(m: MapSpec, pts, cfg: OrbitConfig = DEFAULT_ORBIT, backend=None) -> list:
    """Classify the forward orbit of every seed; results follow the seed order."""
    pts = _points(pts)
    mod = backend or kernels.get_backend()
    cm = kernels.compile_map(m, mod)
    kind, period, iters, fx, fy, note = mod.classify_orbits(
        cm, pts[:, 0].copy(), pts[:, 1].copy(), int(cfg.max_iter), float(cfg.r_esc),
        float(cfg.r_fix), float(cfg.cycle_tol), int(cfg.fix_run), int(cfg.esc_run),
    )
    out = []
    for i in range(len(pts)):
        k = _KIND_OF_CODE[int(kind[i])]
        fin = (float(fx[i]) + 0.0, float(fy[i]) + 0.0)
        per = int(period[i])
        cyc = _cycle(cm, mod, fin, per) if k is OrbitKind.PERIODIC else ()
        out.append(
            OrbitClass(k, int(iters[i]), (float(pts[i, 0]), float(pts[i, 1])), fin, per, cyc,
                       _NOTES[int(note[i])])
        )
    return out


def classify_orbit(m: MapSpec, p, cfg: OrbitConfig = DEFAULT_ORBIT) -> OrbitClass:
    return classify_orbits(m, [p], cfg)[0]


def trajectories(m: MapSpec, pts, n_steps: int, backend=None) -> np.ndarray:
    """Orbit segments, shape ``(N, n_steps + 1, 2)``; NaN after a failure."""
    pts = _points(pts)
    mod = backend or kernels.get_backend()
    return mod.trajectories(kernels.compile_map(m, mod), pts[:, 0].copy(), pts[:, 1].copy(), int(n_steps))


# ---------------------------------------------------------------- periodic points


def _iterate_with_jacobian(m: MapSpec, p: np.ndarray, k: int):
    """``f^k(p)`` and its Jacobian by the chain rule, batched."""
    q = p.copy()
    jac = np.broadcast_to(np.eye(2), (len(p), 2, 2)).copy()
    for _ in range(k):
        with np.errstate(all="ignore"):
            jac = m.jacobian_batch(q) @ jac
            q = m.evaluate_points(q, strict=False)
    return q, jac


def _iterate(m: MapSpec, p: np.ndarray, k: int) -> np.ndarray:
    for _ in range(k):
        with np.errstate(all="ignore"):
            p = m.evaluate_points(p, strict=False)
    return p


def _residual(m, p, k):
    return np.hypot(*(_iterate(m, p, k) - p).T)


def _accept_tol(p):
    return 1e-10 * (1.0 + np.hypot(*np.asarray(p).T))


def _polish(m: MapSpec, roots: np.ndarray, k: int) -> np.ndarray:
    """Snap roots to 12 significant digits where that does not raise the residual."""
    out = roots.copy()
    base = _residual(m, roots, k)
    with np.errstate(divide="ignore"):
        mag = np.where(roots == 0, 0, np.floor(np.log10(np.abs(np.where(roots == 0, 1, roots)))))
    scale = 10.0 ** (11 - mag)
    snapped = np.round(roots * scale) / scale
    snapped[np.abs(roots) < 1e-13] = 0.0
    res = _residual(m, snapped, k)
    better = res <= base
    out[better] = snapped[better]
    return out + 0.0


def newton_roots(
    m: MapSpec, k: int, box_radius: float = 3.0, grid_n: int = 16, extra_seeds=None,
    max_steps: int = 60, dedupe: float = 1e-6,
) -> np.ndarray:
    """Distinct roots of ``f^k(p) - p`` from Newton runs seeded on a grid over the box."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    g = np.linspace(-box_radius, box_radius, grid_n)
    gx, gy = np.meshgrid(g, g)
    seeds = np.column_stack([gx.ravel(), gy.ravel()])
    if extra_seeds is not None and len(extra_seeds):
        seeds = np.vstack([seeds, _points(extra_seeds)])
    p = seeds.copy()
    active = np.ones(len(p), bool)
    limit = 100.0 * box_radius
    eye = np.eye(2)
    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        q, jac = _iterate_with_jacobian(m, p[idx], k)
        resid = q - p[idx]
        a = jac - eye
        det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
        ok = np.isfinite(det) & (np.abs(det) > 1e-14)
        step = np.where(ok[:, None], 0.0, 0.5 * resid)
        with np.errstate(all="ignore"):
            sx = (a[:, 1, 1] * resid[:, 0] - a[:, 0, 1] * resid[:, 1]) / np.where(ok, det, 1.0)
            sy = (-a[:, 1, 0] * resid[:, 0] + a[:, 0, 0] * resid[:, 1]) / np.where(ok, det, 1.0)
        step[ok] = -np.column_stack([sx, sy])[ok]
        new = p[idx] + step
        p[idx] = new
        bad = ~np.all(np.isfinite(new), axis=1) | (np.hypot(*new.T) > limit)
        done = np.hypot(*step.T) <= 1e-15 * (1.0 + np.hypot(*new.T))
        active[idx[bad | done]] = False
        p[idx[bad]] = np.nan
    fin = np.all(np.isfinite(p), axis=1)
    p = p[fin]
    if len(p) == 0:
        return np.zeros((0, 2))
    res = _residual(m, p, k)
    p = p[np.isfinite(res) & (res <= _accept_tol(p))]
    if len(p) == 0:
        return np.zeros((0, 2))
    p = _polish(m, p, k)
    res = _residual(m, p, k)
    order = np.argsort(res, kind="stable")
    kept: list = []
    for i in order:
        if all(math.hypot(*(p[i] - q)) > dedupe for q in kept):
            kept.append(p[i])
    kept.sort(key=lambda v: (round(float(v[0]), 9), round(float(v[1]), 9)))
    return np.array(kept).reshape(-1, 2)


def find_fixed_points(
    m: MapSpec, box_radius: float = 3.0, grid_n: int = 16, extra_seeds=None
) -> np.ndarray:
    return newton_roots(m, 1, box_radius, grid_n, extra_seeds)


def find_two_periodic(
    m: MapSpec, box_radius: float = 3.0, grid_n: int = 16, extra_seeds=None
) -> list:
    """Period-2 orbits as pairs ``(q, f(q))`` with the lexicographically larger point first."""
    roots = newton_roots(m, 2, box_radius, grid_n, extra_seeds)
    if len(roots) == 0:
        return []
    img = m.evaluate_points(roots, strict=False)
    genuine = np.hypot(*(img - roots).T) > 1e-6
    roots, img = roots[genuine], img[genuine]
    pairs, used = [], set()
    for i, q in enumerate(roots):
        if i in used:
            continue
        partner = img[i]
        d = np.hypot(*(roots - partner).T)
        j = int(np.argmin(d)) if len(d) else -1
        if j >= 0 and d[j] <= 1e-6 and j != i:
            partner = roots[j]
            used.add(j)
        used.add(i)
        a, b = tuple(map(float, q)), tuple(map(float, partner))
        pairs.append((a, b) if a >= b else (b, a))
    pairs.sort(key=lambda pr: (-pr[0][0], -pr[0][1]))
    return pairs


# ---------------------------------------------------------------- probes


class ProbeStatus(str, Enum):
    SUPPORTED = "Supported"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ProbeResult:
    status: ProbeStatus
    witness: Optional[tuple] = None
    evidence: dict = field(default_factory=dict)


def _circle(radius: float, n: int, phase: float = 0.0) -> np.ndarray:
    t = phase + 2 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(t), np.sin(t)])


def dissipativity_probe(
    m: MapSpec, R_test: float = 10.0, R_trap: Optional[float] = None, n_steps: int = 200,
    n_points: int = 64, r_esc: float = 1e6,
) -> ProbeResult:
    """Do orbits from far out enter a trap ball and stay there?"""
    R_trap = 0.5 * R_test if R_trap is None else float(R_trap)
    if not R_test > R_trap > 0:
        raise ValueError("need R_test > R_trap > 0")
    seeds = np.vstack([_circle(R_test, n_points, 0.1), _circle(2 * R_test, n_points, 0.3)])
    mod = kernels.get_backend()
    status, when = mod.trap_probe(
        kernels.compile_map(m, mod), seeds[:, 0].copy(), seeds[:, 1].copy(), int(n_steps),
        float(R_trap), float(r_esc),
    )
    counts = {
        "trapped": int(np.sum(status == kernels.TRAPPED)),
        "escaped": int(np.sum(status == kernels.ESCAPED)),
        "undecided": int(np.sum(status == kernels.UNDECIDED)),
        "failed": int(np.sum(status == kernels.FAILED)),
    }
    evidence = {"R_test": R_test, "R_trap": R_trap, "n_steps": n_steps, "seeds": len(seeds), **counts}
    esc = np.flatnonzero(status == kernels.ESCAPED)
    if esc.size:
        # prefer the escaping seed of smallest norm
        i = int(esc[np.argmin(np.hypot(*seeds[esc].T))])
        evidence["escape_step"] = int(when[i])
        return ProbeResult(ProbeStatus.REFUTED, (float(seeds[i, 0]), float(seeds[i, 1])), evidence)
    if counts["trapped"] == len(seeds):
        evidence["max_entry_step"] = int(np.max(when))
        return ProbeResult(ProbeStatus.SUPPORTED, None, evidence)
    return ProbeResult(ProbeStatus.UNKNOWN, None, evidence)


@dataclass(frozen=True)
class SurveyResult:
    counts: dict
    orbits: list
    radius: float

    def of_kind(self, kind: OrbitKind) -> list:
        return [o for o in self.orbits if o.kind is kind]

    @property
    def witnesses(self) -> list:
        """Orbits contradicting trivial dynamics (periodic or unresolved)."""
        return [o for o in self.orbits if o.kind in (OrbitKind.PERIODIC, OrbitKind.UNRESOLVED)]


def disk_samples(n: int, radius: float, seed: int = 42) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    t = rng.uniform(0.0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def dichotomy_survey(
    m: MapSpec, n_points: int = 200, cfg: OrbitConfig = DEFAULT_ORBIT, radius: float = 6.0,
    seed: int = 42, extra_seeds=None,
) -> SurveyResult:
    """Classify orbits from a deterministic disk sample (plus any ``extra_seeds``)."""
    pts = disk_samples(n_points, radius, seed)
    if extra_seeds is not None and len(extra_seeds):
        pts = np.vstack([pts, _points(extra_seeds)])
    orbits = classify_orbits(m, pts, cfg)
    counts = {k.value: 0 for k in OrbitKind}
    for o in orbits:
        counts[o.kind.value] += 1
    return SurveyResult(counts, orbits, radius)


@dataclass(frozen=True)
class Omega2Result:
    passed: bool
    vacuous: bool
    under_f: OrbitClass
    under_f2: OrbitClass


def omega2_consistency(
    m: MapSpec, p, cfg: OrbitConfig = DEFAULT_ORBIT, origin_tol: float = 1e-6,
    m2: Optional[MapSpec] = None,
) -> Omega2Result:
    """Check that convergence to 0 or escape under ``f^2`` carries over to ``f``."""
    m2 = m.self_compose() if m2 is None else m2
    c1 = classify_orbit(m, p, cfg)
    c2 = classify_orbit(m2, p, cfg)
    if c2.converges_to_origin(origin_tol):
        return Omega2Result(c1.converges_to_origin(origin_tol), False, c1, c2)
    if c2.kind is OrbitKind.TO_INFINITY:
        return Omega2Result(c1.kind is OrbitKind.TO_INFINITY, False, c1, c2)
    return Omega2Result(True, True, c1, c2)


@dataclass(frozen=True)
class EmbeddingEvidence:
    status: ProbeStatus
    orientation: Optional[str]  # "preserving", "reversing" or None when mixed
    min_det: float
    max_det: float
    witness: Optional[tuple] = None  # two distinct points with (numerically) equal images


def embedding_probe(m: MapSpec, box_radius: float = 3.0, n: int = 64) -> EmbeddingEvidence:
    """Sampled injectivity and Jacobian-determinant sign on a grid over the box."""
    g = np.linspace(-box_radius, box_radius, n)
    gx, gy = np.meshgrid(g, g)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    img = m.evaluate_points(pts, strict=False)
    finite = np.all(np.isfinite(img), axis=1)
    jac = m.jacobian_batch(pts)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    det = det[np.isfinite(det)]
    lo = float(det.min()) if det.size else math.nan
    hi = float(det.max()) if det.size else math.nan
    orient = "preserving" if lo > 0 else "reversing" if hi < 0 else None
    idx = np.flatnonzero(finite)
    tree = cKDTree(img[idx])
    for i, j in sorted(tree.query_pairs(r=1e-10)):
        a, b = pts[idx[i]], pts[idx[j]]
        if math.hypot(*(a - b)) > 1e-8:
            return EmbeddingEvidence(
                ProbeStatus.REFUTED, orient, lo, hi,
                ((float(a[0]), float(a[1])), (float(b[0]), float(b[1]))),
            )
    if orient is None or not finite.all():
        return EmbeddingEvidence(ProbeStatus.UNKNOWN, orient, lo, hi)
    return EmbeddingEvidence(ProbeStatus.SUPPORTED, orient, lo, hi)


def spectrum_sample(m: MapSpec, box_radius: float = 3.0, n: int = 32) -> dict:
    """Eigenvalues of ``Df(p)`` on a grid: how often one is real and nonnegative.

    Recorded as evidence only; no conclusion depends on it.
    """
    g = np.linspace(-box_radius, box_radius, n)
    gx, gy = np.meshgrid(g, g)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    jac = m.jacobian_batch(pts)
    ok = np.all(np.isfinite(jac.reshape(len(jac), -1)), axis=1)
    hits, first = 0, None
    for p, j in zip(pts[ok], jac[ok]):
        ev = np.linalg.eigvals(j)
        if np.any((np.abs(ev.imag) <= 1e-12) & (ev.real >= 0)):
            hits += 1
            if first is None:
                first = (float(p[0]), float(p[1]))
    return {"samples": int(ok.sum()), "nonnegative_real_eigenvalue": hits, "first_hit": first}


# ---------------------------------------------------------------- radial path


class RadialReductionError(ValueError):
    pass


@dataclass(frozen=True)
class RadialTable:
    rho: np.ndarray
    values: np.ndarray
    residual: float

    def __call__(self, r):
        return np.interp(r, self.rho, self.values)


def radial_profile(m: MapSpec) -> Callable:
    """``rho -> |f(rho, 0)|`` evaluated directly."""

    def R(rho):
        rho = np.asarray(rho, float)
        u, v = m.evaluate(rho, np.zeros_like(rho), strict=False)
        return np.hypot(u, v)

    return R


def radial_reduce(
    m: MapSpec, rho_max: float = 6.0, n_rho: int = 200, n_theta: int = 64, tol: float = 1e-9
) -> RadialTable:
    """Tabulate ``R(rho) = |f(rho, 0)|`` and measure how much ``|f|`` depends on the angle."""
    rho = np.linspace(0.0, rho_max, n_rho)
    R = radial_profile(m)(rho)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(rho, th)
    u, v = m.evaluate((rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel(), strict=False)
    dev = np.abs(np.hypot(u, v).reshape(rr.shape) - R[None, :])
    residual = float(np.max(dev)) if np.all(np.isfinite(dev)) else math.inf
    if not residual <= tol * (1.0 + float(np.max(np.abs(R)))):
        raise RadialReductionError(f"|f| depends on the angle: residual {residual:.3g}")
    return RadialTable(rho, R, residual)


class IntervalKind(str, Enum):
    GLOBAL_ATTRACTOR = "GlobalAttractor"
    GLOBAL_REPELLOR = "GlobalRepellor"
    INVARIANT_CIRCLES = "InvariantCircles"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class IntervalVerdict:
    kind: IntervalKind
    radii: tuple = ()
    witness: Optional[float] = None
    note: str = ""


def _bisect(h, a, b, fa, iters=200):
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        fm = float(h(np.array([mid]))[0])
        if fm == 0.0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def analyze_interval_map(R: Callable, rho_max: float, n: int = 2001, tol: float = 1e-12) -> IntervalVerdict:
    """Dynamics of a 1-D map ``R`` on ``[0, rho_max]`` with ``R(0) = 0``."""
    rho = np.linspace(0.0, rho_max, n)
    vals = np.asarray(R(rho), float)
    if not np.all(np.isfinite(vals)):
        i = int(np.argmax(~np.isfinite(vals)))
        return IntervalVerdict(IntervalKind.INCONCLUSIVE, witness=float(rho[i]), note="non-finite value")
    if abs(vals[0]) > tol:
        return IntervalVerdict(IntervalKind.INCONCLUSIVE, witness=0.0, note="R(0) != 0")
    dif = np.diff(vals)
    if np.any(dif <= 0):
        i = int(np.argmax(dif <= 0))
        return IntervalVerdict(IntervalKind.INCONCLUSIVE, witness=float(rho[i + 1]), note="not increasing")

    def h(r):
        return np.asarray(R(r), float) - r

    hv = vals[1:] - rho[1:]
    rr = rho[1:]
    roots = [float(r) for r, v in zip(rr, hv) if v == 0.0]
    s = np.sign(hv)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        roots.append(_bisect(h, float(rr[i]), float(rr[i + 1]), float(hv[i])))
    if roots:
        return IntervalVerdict(IntervalKind.INVARIANT_CIRCLES, tuple(sorted(roots)))
    if np.all(hv < 0):
        return IntervalVerdict(IntervalKind.GLOBAL_ATTRACTOR)
    if np.all(hv > 0):
        return IntervalVerdict(IntervalKind.GLOBAL_REPELLOR)
    return IntervalVerdict(IntervalKind.INCONCLUSIVE, note="sign pattern without a crossing")
