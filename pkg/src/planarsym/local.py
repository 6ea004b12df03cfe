"""Local analysis at the origin: equivariant table, eigenvalue class, contraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .algebra import (
    AdaptedNormError,
    EigenPair,
    InnerProduct2,
    adapted_basis,
    commutator_residual,
    eig2,
    rotation,
)
from .groups import GroupSpec, generators
from .maps import MapSpec
from .symmetry import GENERIC_ANGLES


class LocalKind(str, Enum):
    ATTRACTOR = "Attractor"
    REPELLOR = "Repellor"
    SADDLE = "Saddle"
    NON_HYPERBOLIC = "NonHyperbolic"


class JacobianPattern(str, Enum):
    SCALAR_ALPHA_I = "ScalarAlphaI"
    ROTATION_SCALING = "RotationScaling"
    DIAGONAL = "Diagonal"
    ANY_MATRIX = "AnyMatrix"


class GlobalRoute(str, Enum):
    EMB_DISSIPATIVE_ATTRACTOR = "EmbDissipativeAttractor"
    EMB_REPELLOR = "EmbRepellor"
    OTHER_CONFIGURATIONS = "OtherConfigurations"
    SADDLE_OUT_OF_SCOPE = "SaddleOutOfScope"


class LocalAnalysisError(ValueError):
    pass


class OriginNotFixedError(LocalAnalysisError):
    pass


@dataclass(frozen=True)
class LocalClass:
    kind: LocalKind
    eigenvalues: EigenPair
    margin: float
    jacobian: np.ndarray = field(compare=False, repr=False, default=None)

    def to_dict(self) -> dict:
        ev = self.eigenvalues
        return {
            "kind": self.kind.value,
            "eigenvalues": [[ev.lambda1.real, ev.lambda1.imag], [ev.lambda2.real, ev.lambda2.imag]],
            "defective": ev.defective,
            "moduli": list(ev.moduli),
            "margin": self.margin,
            "jacobian": None if self.jacobian is None else self.jacobian.tolist(),
        }


@dataclass(frozen=True)
class TableRow:
    group: GroupSpec
    jacobian_pattern: JacobianPattern
    admissible_local: frozenset
    global_route: Mapping[LocalKind, GlobalRoute]
    contains_flip: bool

    def route_for(self, kind: LocalKind) -> Optional[GlobalRoute]:
        return self.global_route.get(kind)

    def to_dict(self) -> dict:
        order = [LocalKind.ATTRACTOR, LocalKind.REPELLOR, LocalKind.SADDLE]
        return {
            "group": str(self.group),
            "contains_flip": self.contains_flip,
            "jacobian_pattern": self.jacobian_pattern.value,
            "admissible_local": [k.value for k in order if k in self.admissible_local],
            "global_route": {k.value: self.global_route[k].value for k in order if k in self.global_route},
        }


_A, _R, _S = LocalKind.ATTRACTOR, LocalKind.REPELLOR, LocalKind.SADDLE
_EMB = {_A: GlobalRoute.EMB_DISSIPATIVE_ATTRACTOR, _R: GlobalRoute.EMB_REPELLOR}
_OTHER = {_A: GlobalRoute.OTHER_CONFIGURATIONS, _R: GlobalRoute.OTHER_CONFIGURATIONS}


def table_row(g: GroupSpec) -> TableRow:
    """Jacobian form at the origin and local-to-global routes for the group."""
    fam = g.family
    two = fam in ("Dn", "Zn") and g.n == 2
    if fam in ("O2", "Dn") and not two:
        return TableRow(g, JacobianPattern.SCALAR_ALPHA_I, frozenset({_A, _R}), dict(_EMB), True)
    if fam in ("SO2", "Zn") and not two:
        return TableRow(g, JacobianPattern.ROTATION_SCALING, frozenset({_A, _R}), dict(_OTHER), False)
    if fam == "Z2kappa" or (fam == "Dn" and two):
        routes = dict(_EMB)
        routes[_S] = GlobalRoute.SADDLE_OUT_OF_SCOPE
        return TableRow(g, JacobianPattern.DIAGONAL, frozenset({_A, _R, _S}), routes, True)
    # Z2 (acting as -I) and the trivial group impose nothing on Df(0)
    routes = dict(_OTHER)
    routes[_S] = GlobalRoute.SADDLE_OUT_OF_SCOPE
    return TableRow(g, JacobianPattern.ANY_MATRIX, frozenset({_A, _R, _S}), routes, False)


def pattern_residual(a, pattern: JacobianPattern) -> float:
    a = np.asarray(a, float)
    if pattern is JacobianPattern.SCALAR_ALPHA_I:
        return float(max(abs(a[0, 1]), abs(a[1, 0]), abs(a[0, 0] - a[1, 1])))
    if pattern is JacobianPattern.ROTATION_SCALING:
        return float(max(abs(a[0, 0] - a[1, 1]), abs(a[0, 1] + a[1, 0])))
    if pattern is JacobianPattern.DIAGONAL:
        return float(max(abs(a[0, 1]), abs(a[1, 0])))
    return 0.0


# ---------------------------------------------------------------- classification


def origin_jacobian(m: MapSpec) -> np.ndarray:
    return m.jacobian((0.0, 0.0)).matrix


def classify_matrix(a, tol: float = 1e-8) -> LocalClass:
    a = np.asarray(a, float)
    ep = eig2(a)
    m1, m2 = sorted(ep.moduli)
    margin = min(abs(m1 - 1.0), abs(m2 - 1.0))
    if margin < tol:
        kind = LocalKind.NON_HYPERBOLIC
    elif m2 < 1.0:
        kind = LocalKind.ATTRACTOR
    elif m1 > 1.0:
        kind = LocalKind.REPELLOR
    elif ep.is_real and m1 > 0.0:
        kind = LocalKind.SADDLE
    else:
        # a zero eigenvalue opposite an expanding one is not a saddle in the strict sense
        kind = LocalKind.NON_HYPERBOLIC
    return LocalClass(kind, ep, margin, a.copy())


def classify_local(m: MapSpec, tol: float = 1e-8, fix_tol: float = 1e-9) -> LocalClass:
    """Eigenvalue class of ``Df(0)``; the origin must be fixed to within ``fix_tol``."""
    f0 = m((0.0, 0.0))
    if not np.all(np.isfinite(f0)) or float(np.hypot(*f0)) > fix_tol:
        raise OriginNotFixedError(f"origin is not fixed: f(0) = {tuple(map(float, f0))}")
    return classify_matrix(origin_jacobian(m), tol)


@dataclass(frozen=True)
class AuditResult:
    passed: bool
    commutator_residuals: list
    pattern: JacobianPattern
    pattern_residual: float
    jacobian: np.ndarray = field(repr=False, default=None)

    @property
    def max_residual(self) -> float:
        return max([*self.commutator_residuals, self.pattern_residual], default=0.0)


def audit_elements(g: GroupSpec) -> list:
    gens = generators(g)
    mats = list(gens.matrices)
    if gens.continuous_rotation:
        mats += [rotation(t) for t in GENERIC_ANGLES]
    return mats


def audit_matrix(a, g: GroupSpec, tol: float = 1e-9) -> AuditResult:
    """Does ``a`` commute with the group and match its tabulated pattern?"""
    a = np.asarray(a, float)
    res = [commutator_residual(a, el) for el in audit_elements(g)]
    pattern = table_row(g).jacobian_pattern
    pres = pattern_residual(a, pattern)
    ok = all(r <= tol for r in res) and pres <= tol
    return AuditResult(ok, res, pattern, pres, a.copy())


def commutation_audit(m: MapSpec, g: GroupSpec, tol: float = 1e-9) -> AuditResult:
    return audit_matrix(origin_jacobian(m), g, tol)


# ---------------------------------------------------------------- contraction


class Branch(str, Enum):
    CONTRACTION = "contraction"
    EXPANSION = "expansion"


@dataclass(frozen=True)
class ContractionCertificate:
    success: bool
    branch: Branch
    alpha: float
    beta: float
    delta: Optional[float]  # None: holds on the whole plane
    ratio: Optional[float]  # sampled max (contraction) or min (expansion) of |f x|_G / |x|_G
    bound: Optional[float]  # c or c' from the perturbation estimate
    eps: Optional[float]
    gram: Optional[InnerProduct2]
    reason: str = ""

    @property
    def unbounded(self) -> bool:
        return self.success and self.delta is None

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "branch": self.branch.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "delta": "unbounded" if self.unbounded else self.delta,
            "ratio": self.ratio,
            "bound": self.bound,
            "eps": self.eps,
            "gram": None if self.gram is None else [self.gram.g11, self.gram.g12, self.gram.g22],
            "reason": self.reason,
        }


DEFAULT_SCHEDULE = tuple(2.0**-k for k in range(21))
_SHELLS = (1.0, 0.5, 0.25, 0.125)


def default_bounds(ep: EigenPair, branch: Branch) -> tuple:
    lo, hi = sorted(ep.moduli)
    if branch is Branch.CONTRACTION:
        return 0.5 * lo, 0.5 * (1.0 + hi)
    return 0.5 * (1.0 + lo), 1.5 * hi - 0.5


def _ball_samples(basis: np.ndarray, delta: float, n: int) -> np.ndarray:
    """``n`` points at G-radius ``delta * s`` for a few shells ``s``; G-unit frame given by ``basis``."""
    k = np.arange(n)
    t = 2 * np.pi * (k * 0.6180339887498949 % 1.0)
    s = np.array(_SHELLS)[k % len(_SHELLS)]
    unit = np.column_stack([np.cos(t), np.sin(t)])
    return delta * s[:, None] * (unit @ basis.T)


def _is_linear(m: MapSpec) -> bool:
    return m.is_linear


def contraction_certificate(
    m: MapSpec,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    radius_schedule: Sequence[float] = DEFAULT_SCHEDULE,
    n_points: int = 2048,
    branch: Optional[Branch] = None,
    tol: float = 1e-8,
) -> ContractionCertificate:
    """Search for a ball on which ``f`` uniformly contracts (or expands) in an adapted norm.

    ``eps`` bounds the nonlinear remainder ``|f(x) - Df(0)x|_G / |x|_G`` on
    the sample; the ball is accepted when ``beta + eps < 1`` (contraction) or
    ``alpha^2 - 2 beta eps > 1`` (expansion) and the sampled ratio obeys it.
    """
    lc = classify_local(m, tol)
    if branch is None:
        if lc.kind is LocalKind.ATTRACTOR:
            branch = Branch.CONTRACTION
        elif lc.kind is LocalKind.REPELLOR:
            branch = Branch.EXPANSION
        else:
            return ContractionCertificate(
                False, Branch.CONTRACTION, math.nan, math.nan, None, None, None, None, None,
                f"origin is {lc.kind.value}",
            )
    d_alpha, d_beta = default_bounds(lc.eigenvalues, branch)
    alpha = d_alpha if alpha is None else float(alpha)
    beta = d_beta if beta is None else float(beta)

    def fail(reason, eps=None, gram=None):
        return ContractionCertificate(False, branch, alpha, beta, None, None, None, eps, gram, reason)

    if branch is Branch.CONTRACTION and not beta < 1.0:
        return fail(f"contraction needs beta < 1, got {beta}")
    if branch is Branch.EXPANSION and not alpha > 1.0:
        return fail(f"expansion needs alpha > 1, got {alpha}")
    a = lc.jacobian
    try:
        basis = adapted_basis(a, alpha, beta)
    except AdaptedNormError as exc:
        return fail(str(exc))
    gram = InnerProduct2.from_basis(basis)

    def measure(delta):
        pts = _ball_samples(basis, delta, n_points)
        img = m.evaluate_points(pts, strict=False)
        lin = pts @ a.T
        nx = gram.norm(pts)
        ratio = gram.norm(img) / nx
        eps = float(np.max(gram.norm(img - lin) / nx))
        return ratio, eps

    def bound(eps):
        if branch is Branch.CONTRACTION:
            return math.sqrt(beta * beta + 2 * eps * beta + eps * eps)
        q = alpha * alpha - 2 * beta * eps
        return math.sqrt(q) if q > 0 else 0.0

    if _is_linear(m):
        ratio, _ = measure(1.0)
        r = float(np.max(ratio) if branch is Branch.CONTRACTION else np.min(ratio))
        return ContractionCertificate(True, branch, alpha, beta, None, r, bound(0.0), 0.0, gram)

    best = math.inf
    for delta in radius_schedule:
        ratio, eps = measure(float(delta))
        if not np.all(np.isfinite(ratio)) or not math.isfinite(eps):
            continue
        best = min(best, eps)
        c = bound(eps)
        if branch is Branch.CONTRACTION:
            r = float(np.max(ratio))
            if c < 1.0 and r <= c * (1 + 1e-12):
                return ContractionCertificate(True, branch, alpha, beta, float(delta), r, c, eps, gram)
        else:
            r = float(np.min(ratio))
            if c > 1.0 and r >= c * (1 - 1e-12):
                return ContractionCertificate(True, branch, alpha, beta, float(delta), r, c, eps, gram)
    return fail("radius schedule exhausted", None if math.isinf(best) else best, gram)
