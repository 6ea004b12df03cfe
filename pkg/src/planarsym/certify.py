"""Combine symmetry, local and orbit evidence into a global-dynamics certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from . import dynamics as dyn
from .groups import GroupSpec, contains_flip
from .local import (
    Branch,
    LocalAnalysisError,
    LocalClass,
    LocalKind,
    TableRow,
    classify_local,
    contraction_certificate,
    table_row,
)
from .maps import MapSpec, NonDifferentiableError
from .maps.spec import JacobianMode
from .symmetry import (
    EquivarianceMode,
    HalfPlaneVerdict,
    check_equivariance,
    detect_symmetry_group,
    interchanges_half_planes,
    upper_half_samples,
)


class HypStatus(str, Enum):
    VERIFIED_EXACT = "VerifiedExact"
    NUMERICALLY_SUPPORTED = "NumericallySupported"
    UNKNOWN = "Unknown"
    REFUTED = "Refuted"


_RANK = {
    HypStatus.VERIFIED_EXACT: 3,
    HypStatus.NUMERICALLY_SUPPORTED: 2,
    HypStatus.UNKNOWN: 1,
    HypStatus.REFUTED: 0,
}


def holds(s: HypStatus) -> bool:
    return _RANK[s] >= 2


def weakest(statuses) -> Optional[HypStatus]:
    statuses = list(statuses)
    return min(statuses, key=_RANK.__getitem__) if statuses else None


class Conclusion(str, Enum):
    GLOBAL_ATTRACTOR = "GlobalAttractor"
    GLOBAL_ASYMPTOTIC_ATTRACTOR = "GlobalAsymptoticAttractor"
    GLOBAL_REPELLOR = "GlobalRepellor"
    GLOBAL_ASYMPTOTIC_REPELLOR = "GlobalAsymptoticRepellor"
    NOT_CERTIFIED = "NotCertified"
    OTHER_CONFIGURATIONS = "OtherConfigurations"
    SADDLE_OUT_OF_SCOPE = "SaddleOutOfScope"


STRENGTH = {
    Conclusion.GLOBAL_ASYMPTOTIC_ATTRACTOR: 2,
    Conclusion.GLOBAL_ASYMPTOTIC_REPELLOR: 2,
    Conclusion.GLOBAL_ATTRACTOR: 1,
    Conclusion.GLOBAL_REPELLOR: 1,
    Conclusion.NOT_CERTIFIED: 0,
    Conclusion.OTHER_CONFIGURATIONS: 0,
    Conclusion.SADDLE_OUT_OF_SCOPE: 0,
}


@dataclass
class HypothesisRecord:
    name: str
    status: HypStatus
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status.value, "evidence": self.evidence}


@dataclass
class Certificate:
    map_name: str
    group: GroupSpec
    local: Optional[LocalClass]
    hypotheses: list
    conclusion: Conclusion
    route: str
    reason: str = ""
    grade: Optional[HypStatus] = None
    table: Optional[TableRow] = None
    errors: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)

    def hypothesis(self, name: str) -> Optional[HypothesisRecord]:
        for h in self.hypotheses:
            if h.name == name:
                return h
        return None

    def to_dict(self) -> dict:
        return {
            "map": self.map_name,
            "group": str(self.group),
            "local": None if self.local is None else self.local.to_dict(),
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "conclusion": self.conclusion.value,
            "route": self.route,
            "grade": None if self.grade is None else self.grade.value,
            "reason": self.reason,
            "table_row": None if self.table is None else self.table.to_dict(),
            "errors": list(self.errors),
            "evidence": dict(self.evidence),
        }


@dataclass(frozen=True)
class CertifyConfig:
    box: float = 3.0
    grid_n: int = 16
    n_max: int = 12
    tol: float = 1e-9
    local_tol: float = 1e-8
    orbit: dyn.OrbitConfig = dyn.DEFAULT_ORBIT
    survey_points: int = 200
    seed: int = 42
    R_test: float = 10.0
    dissip_steps: int = 200
    dissip_points: int = 64
    embed_n: int = 64

    @property
    def survey_radius(self) -> float:
        return 2.0 * self.box


# ---------------------------------------------------------------- decision


ATTRACTOR_REQUIRED = (
    "equivariance", "contains_flip", "embedding", "unique_fixed_point", "local_attractor",
    "dissipative", "trivial_dynamics_survey",
)
REPELLOR_REQUIRED = (
    "equivariance", "contains_flip", "embedding", "unique_fixed_point", "local_repellor",
    "trivial_dynamics_survey",
)
BRANCH_B = "no_two_periodic"
BRANCH_A = "orientation_preserving_no_interchange"


@dataclass(frozen=True)
class Decision:
    conclusion: Conclusion
    route: str
    reason: str
    used: tuple  # names of the records the conclusion rests on


def decide(path: str, statuses: Mapping[str, HypStatus]) -> Decision:
    """Pure decision rule over hypothesis statuses (``path``: attractor or repellor)."""
    attract = path == "attractor"
    required = ATTRACTOR_REQUIRED if attract else REPELLOR_REQUIRED
    word = "attractor" if attract else "repellor"

    def st(name):
        return statuses.get(name, HypStatus.UNKNOWN)

    failing = [n for n in required if not holds(st(n))]
    if holds(st(BRANCH_B)):
        branch, bname = "b", BRANCH_B
    elif holds(st(BRANCH_A)):
        branch, bname = "a", BRANCH_A
    else:
        branch, bname = None, None
        failing += [BRANCH_B, BRANCH_A]
    if failing:
        refuted = [n for n in failing if st(n) is HypStatus.REFUTED]
        rest = [n for n in failing if n not in refuted]
        parts = []
        if refuted:
            parts.append("refuted: " + ", ".join(refuted))
        if rest:
            parts.append("not established: " + ", ".join(rest))
        return Decision(
            Conclusion.NOT_CERTIFIED, f"global {word} theorem not applicable", "; ".join(parts),
            tuple(required) + (BRANCH_B, BRANCH_A),
        )
    route = f"Theorem: global {word} route ({branch})"
    used = tuple(required) + (bname,)
    local_cert = "local_contraction" if attract else "local_expansion"
    if holds(st(local_cert)):
        route += "; corollary: asymptotic upgrade from the eigenvalue condition"
        conc = Conclusion.GLOBAL_ASYMPTOTIC_ATTRACTOR if attract else Conclusion.GLOBAL_ASYMPTOTIC_REPELLOR
        return Decision(conc, route, "", used + (local_cert,))
    conc = Conclusion.GLOBAL_ATTRACTOR if attract else Conclusion.GLOBAL_REPELLOR
    return Decision(conc, route, "", used)


# ---------------------------------------------------------------- evidence


def _pt(p) -> list:
    return [float(p[0]) + 0.0, float(p[1]) + 0.0]


def _witness_orbit(m: MapSpec, p, cfg: dyn.OrbitConfig) -> dict:
    o = dyn.classify_orbit(m, p, cfg)
    return {"seed": _pt(p), "claimed_class": o.kind.value, "period": o.period}


def _is_linear(m: MapSpec) -> bool:
    return m.is_linear


def _rec_equivariance(m: MapSpec, g: GroupSpec, tol: float) -> HypothesisRecord:
    rep = check_equivariance(m, g, tol)
    status = HypStatus.VERIFIED_EXACT if rep.mode is EquivarianceMode.EXACT else HypStatus.NUMERICALLY_SUPPORTED
    if not rep.holds:
        status = HypStatus.REFUTED
    ev = {"group": str(g), "mode": rep.mode.value, "max_residual": rep.max_residual}
    if rep.witness is not None:
        ev["witness"] = list(rep.witness)
    return HypothesisRecord("equivariance", status, ev)


def _rec_unique_fixed(m, a, cfg, fixed) -> HypothesisRecord:
    if _is_linear(m):
        det = float(np.linalg.det(a - np.eye(2)))
        st = HypStatus.VERIFIED_EXACT if det != 0.0 else HypStatus.REFUTED
        ev = {"method": "linear map: det(Df - I)", "det": det}
        if det == 0.0:
            w, _ = _kernel_vector(a - np.eye(2))
            ev["witness"] = _pt(w)
        return HypothesisRecord("unique_fixed_point", st, ev)
    others = [p for p in fixed if math.hypot(*p) > 1e-6]
    ev = {"method": "Newton grid search", "box": cfg.box, "grid_n": cfg.grid_n, "found": [_pt(p) for p in fixed]}
    if others:
        ev["witness"] = _pt(others[0])
        return HypothesisRecord("unique_fixed_point", HypStatus.REFUTED, ev)
    if len(fixed) == 0:
        return HypothesisRecord("unique_fixed_point", HypStatus.UNKNOWN, ev)
    return HypothesisRecord("unique_fixed_point", HypStatus.NUMERICALLY_SUPPORTED, ev)


def _kernel_vector(b):
    _, _, vt = np.linalg.svd(b)
    return vt[-1], None


def _rec_two_periodic(m, a, cfg, pairs, ocfg) -> HypothesisRecord:
    if _is_linear(m):
        det = float(np.linalg.det(a @ a - np.eye(2)))
        if det != 0.0:
            return HypothesisRecord(
                BRANCH_B, HypStatus.VERIFIED_EXACT, {"method": "linear map: det(Df^2 - I)", "det": det}
            )
        w, _ = _kernel_vector(a @ a - np.eye(2))
        return HypothesisRecord(
            BRANCH_B, HypStatus.REFUTED,
            {"method": "linear map: det(Df^2 - I)", "det": det, "witness": _pt(w)},
        )
    ev = {"method": "Newton grid search on f^2", "box": cfg.box, "grid_n": cfg.grid_n}
    if pairs:
        q, fq = pairs[0]
        ev["witness"] = [_pt(q), _pt(fq)]
        ev["pairs"] = [[_pt(a_), _pt(b_)] for a_, b_ in pairs]
        ev["orbit"] = _witness_orbit(m, q, ocfg)
        return HypothesisRecord(BRANCH_B, HypStatus.REFUTED, ev)
    return HypothesisRecord(BRANCH_B, HypStatus.NUMERICALLY_SUPPORTED, ev)


def _rec_branch_a(m, emb, cfg) -> HypothesisRecord:
    hp = interchanges_half_planes(m, radius=cfg.box, seed=cfg.seed)
    ev = {"orientation": emb.orientation, "det_range": [emb.min_det, emb.max_det],
          "half_planes": hp.verdict.value}
    if emb.orientation == "reversing":
        ev["witness"] = [0.0, 0.0]
        ev["detail"] = "Jacobian determinant negative on the sample grid"
        return HypothesisRecord(BRANCH_A, HypStatus.REFUTED, ev)
    if hp.verdict is HalfPlaneVerdict.SWAPS:
        p = upper_half_samples(radius=cfg.box, seed=cfg.seed)[0]
        ev["witness"] = _pt(p)
        ev["image"] = _pt(m(p))
        return HypothesisRecord(BRANCH_A, HypStatus.REFUTED, ev)
    if hp.verdict is HalfPlaneVerdict.INCONSISTENT:
        ev["witness"] = list(hp.witness)
        return HypothesisRecord(BRANCH_A, HypStatus.UNKNOWN, ev)
    if emb.orientation == "preserving":
        return HypothesisRecord(BRANCH_A, HypStatus.NUMERICALLY_SUPPORTED, ev)
    return HypothesisRecord(BRANCH_A, HypStatus.UNKNOWN, ev)


def _rec_embedding(emb) -> HypothesisRecord:
    ev = {"method": "sampled injectivity and Jacobian sign", "det_range": [emb.min_det, emb.max_det],
          "orientation": emb.orientation}
    if emb.status is dyn.ProbeStatus.REFUTED:
        ev["witness"] = [list(emb.witness[0]), list(emb.witness[1])]
        return HypothesisRecord("embedding", HypStatus.REFUTED, ev)
    if emb.status is dyn.ProbeStatus.SUPPORTED:
        return HypothesisRecord("embedding", HypStatus.NUMERICALLY_SUPPORTED, ev)
    return HypothesisRecord("embedding", HypStatus.UNKNOWN, ev)


def _rec_dissipative(m, cfg) -> HypothesisRecord:
    pr = dyn.dissipativity_probe(m, cfg.R_test, None, cfg.dissip_steps, cfg.dissip_points, cfg.orbit.r_esc)
    ev = dict(pr.evidence)
    if pr.status is dyn.ProbeStatus.REFUTED:
        ev["witness"] = _pt(pr.witness)
        ev["orbit"] = _witness_orbit(m, pr.witness, cfg.orbit)
        return HypothesisRecord("dissipative", HypStatus.REFUTED, ev)
    if pr.status is dyn.ProbeStatus.SUPPORTED:
        return HypothesisRecord("dissipative", HypStatus.NUMERICALLY_SUPPORTED, ev)
    return HypothesisRecord("dissipative", HypStatus.UNKNOWN, ev)


def _rec_survey(m, cfg, extra, attract: bool) -> HypothesisRecord:
    extra = [p for p in extra if math.hypot(*p) > 1e-12]
    sv = dyn.dichotomy_survey(m, cfg.survey_points, cfg.orbit, cfg.survey_radius, cfg.seed, extra or None)
    ev = {"points": len(sv.orbits), "radius": sv.radius, "counts": sv.counts}
    bad, unresolved = None, None
    for o in sv.orbits:
        if o.kind is dyn.OrbitKind.UNRESOLVED:
            unresolved = unresolved or o
            continue
        if attract:
            ok = o.converges_to_origin()
        else:
            ok = o.kind is dyn.OrbitKind.TO_INFINITY
        if not ok:
            bad = o
            break
    if bad is not None:
        ev["witness"] = list(bad.seed)
        ev["orbit"] = {"seed": list(bad.seed), "claimed_class": bad.kind.value, "period": bad.period,
                       "final": list(bad.final)}
        return HypothesisRecord("trivial_dynamics_survey", HypStatus.REFUTED, ev)
    if unresolved is not None:
        ev["unresolved_seed"] = list(unresolved.seed)
        return HypothesisRecord("trivial_dynamics_survey", HypStatus.UNKNOWN, ev)
    return HypothesisRecord("trivial_dynamics_survey", HypStatus.NUMERICALLY_SUPPORTED, ev)


def _rec_local(m, lc: LocalClass, kind: LocalKind) -> HypothesisRecord:
    name = "local_attractor" if kind is LocalKind.ATTRACTOR else "local_repellor"
    ok = lc.kind is kind
    analytic = m.is_polynomial
    if ok:
        st = HypStatus.VERIFIED_EXACT if analytic else HypStatus.NUMERICALLY_SUPPORTED
    else:
        st = HypStatus.REFUTED
    ev = {"kind": lc.kind.value, "moduli": list(lc.eigenvalues.moduli), "margin": lc.margin,
          "jacobian": "Analytic" if analytic else JacobianMode.FINITE_DIFFERENCE.value}
    if not ok:
        ev["witness"] = [0.0, 0.0]
    return HypothesisRecord(name, st, ev)


def _rec_local_cert(m, branch: Branch, local_tol) -> HypothesisRecord:
    name = "local_contraction" if branch is Branch.CONTRACTION else "local_expansion"
    cc = contraction_certificate(m, branch=branch, tol=local_tol)
    if cc.success:
        st = HypStatus.VERIFIED_EXACT if cc.unbounded else HypStatus.NUMERICALLY_SUPPORTED
    else:
        st = HypStatus.UNKNOWN
    return HypothesisRecord(name, st, cc.to_dict())


# ---------------------------------------------------------------- pipeline


def _radial_path(m, g, row, cfg, hyps, errors) -> Certificate:
    rho_max = cfg.survey_radius
    try:
        tab = dyn.radial_reduce(m, rho_max, tol=cfg.tol)
    except dyn.RadialReductionError as exc:
        errors.append(str(exc))
        hyps.append(HypothesisRecord("radial_reduction", HypStatus.REFUTED, {"error": str(exc)}))
        return Certificate(m.name, g, None, hyps, Conclusion.OTHER_CONFIGURATIONS,
                           "group without flip: other configurations", str(exc), None, row, errors)
    verdict = dyn.analyze_interval_map(dyn.radial_profile(m), rho_max)
    ev = {"rho_max": rho_max, "angle_residual": tab.residual, "interval_verdict": verdict.kind.value}
    if verdict.radii:
        ev["invariant_circles"] = list(verdict.radii)
    if verdict.witness is not None:
        ev["witness"] = verdict.witness
    conclusive = verdict.kind in (dyn.IntervalKind.GLOBAL_ATTRACTOR, dyn.IntervalKind.GLOBAL_REPELLOR)
    hyps.append(HypothesisRecord(
        "radial_reduction", HypStatus.NUMERICALLY_SUPPORTED if conclusive else HypStatus.UNKNOWN, ev))
    if not conclusive:
        return Certificate(m.name, g, None, hyps, Conclusion.OTHER_CONFIGURATIONS,
                           "group without flip: radial reduction inconclusive",
                           f"interval map verdict {verdict.kind.value}", None, row, errors)
    attract = verdict.kind is dyn.IntervalKind.GLOBAL_ATTRACTOR
    # the survey can only contradict the radial verdict; slow (non-geometric)
    # convergence leaves orbits unresolved without counting against it
    sv = _rec_survey(m, cfg, [], attract)
    hyps.append(sv)
    if sv.status is HypStatus.REFUTED:
        return Certificate(m.name, g, None, hyps, Conclusion.NOT_CERTIFIED,
                           "radial reduction contradicted by orbit survey",
                           "refuted: trivial_dynamics_survey", sv.status, row, errors)
    conc = Conclusion.GLOBAL_ATTRACTOR if attract else Conclusion.GLOBAL_REPELLOR
    word = "attractor" if attract else "repellor"
    grade = weakest(h.status for h in hyps if h.name in ("equivariance", "radial_reduction"))
    return Certificate(m.name, g, None, hyps, conc,
                       f"radial reduction: interval map is a global {word}", "", grade, row, errors)


def certify_global(m: MapSpec, cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    """Run the full pipeline; every failure mode ends up in the conclusion, never raised."""
    errors: list = []
    g = detect_symmetry_group(m, cfg.n_max, cfg.tol)
    row = table_row(g)
    hyps = [_rec_equivariance(m, g, cfg.tol)]
    flip = contains_flip(g)
    hyps.append(HypothesisRecord(
        "contains_flip", HypStatus.VERIFIED_EXACT if flip else HypStatus.REFUTED,
        {"group": str(g)} if flip else {"group": str(g), "witness": [0.0, 1.0]},
    ))

    lc = None
    try:
        lc = classify_local(m, cfg.local_tol, cfg.tol)
    except (LocalAnalysisError, NonDifferentiableError, ValueError) as exc:
        errors.append(f"local analysis: {exc}")

    if not flip:
        if g.family == "SO2":
            cert = _radial_path(m, g, row, cfg, hyps, errors)
            cert.local = lc
            return cert
        return Certificate(m.name, g, lc, hyps, Conclusion.OTHER_CONFIGURATIONS,
                           "group without flip: other configurations",
                           "flip-based theorems do not apply", None, row, errors)
    if lc is None:
        return Certificate(m.name, g, None, hyps, Conclusion.NOT_CERTIFIED, "local analysis unavailable",
                           errors[-1] if errors else "", None, row, errors)
    if lc.kind is LocalKind.SADDLE:
        return Certificate(m.name, g, lc, hyps, Conclusion.SADDLE_OUT_OF_SCOPE, "local saddle: out of scope",
                           "saddle global dynamics are not addressed", None, row, errors)
    if lc.kind is LocalKind.NON_HYPERBOLIC:
        return Certificate(m.name, g, lc, hyps, Conclusion.NOT_CERTIFIED, "non-hyperbolic fixed point",
                           f"hyperbolicity margin {lc.margin:.3g} below tolerance", None, row, errors)

    attract = lc.kind is LocalKind.ATTRACTOR
    a = lc.jacobian
    emb = dyn.embedding_probe(m, cfg.box, cfg.embed_n)
    hyps.append(_rec_embedding(emb))
    fixed = [] if _is_linear(m) else list(dyn.find_fixed_points(m, cfg.box, cfg.grid_n))
    hyps.append(_rec_unique_fixed(m, a, cfg, fixed))
    hyps.append(_rec_local(m, lc, LocalKind.ATTRACTOR if attract else LocalKind.REPELLOR))
    if attract:
        hyps.append(_rec_dissipative(m, cfg))
    pairs = [] if _is_linear(m) else dyn.find_two_periodic(m, cfg.box, cfg.grid_n)
    hyps.append(_rec_two_periodic(m, a, cfg, pairs, cfg.orbit))
    hyps.append(_rec_branch_a(m, emb, cfg))
    hyps.append(_rec_local_cert(m, Branch.CONTRACTION if attract else Branch.EXPANSION, cfg.local_tol))
    extra = list(fixed) + [p for pr in pairs for p in pr]
    hyps.append(_rec_survey(m, cfg, extra, attract))

    d = decide("attractor" if attract else "repellor", {h.name: h.status for h in hyps})
    by_name = {h.name: h for h in hyps}
    grade = weakest(by_name[n].status for n in d.used if n in by_name)
    notes = {"jacobian_spectrum": dyn.spectrum_sample(m, cfg.box)}
    return Certificate(m.name, g, lc, hyps, d.conclusion, d.route, d.reason, grade, row, errors, notes)


# ---------------------------------------------------------------- text


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def explain(cert: Certificate) -> str:
    lines = [f"map: {cert.map_name}", f"symmetry group: {cert.group}"]
    if cert.local is not None:
        ev = cert.local.eigenvalues
        lines.append(
            f"local class at origin: {cert.local.kind.value} "
            f"(|lambda| = {_fmt(list(ev.moduli))}, margin {cert.local.margin:.3g})"
        )
    else:
        lines.append("local class at origin: unavailable")
    lines.append(f"conclusion: {cert.conclusion.value}")
    lines.append(f"route: {cert.route}")
    if cert.reason:
        lines.append(f"reason: {cert.reason}")
    if cert.grade is not None:
        lines.append(f"evidence grade: {cert.grade.value}")
    lines.append("hypotheses:")
    for h in cert.hypotheses:
        lines.append(f"  - {h.name}: {h.status.value}")
        w = h.evidence.get("witness")
        if w is not None:
            label = "period-2 witness" if h.name == BRANCH_B else "witness"
            lines.append(f"      {label}: {_fmt(w)}")
        if h.name == "radial_reduction":
            lines.append(
                f"      radial reduction R(rho) = |f(rho, 0)|: angle residual "
                f"{_fmt(h.evidence.get('angle_residual'))}, verdict {h.evidence.get('interval_verdict', '?')}"
            )
    if cert.table is not None:
        t = cert.table.to_dict()
        lines.append(
            f"table row: pattern {t['jacobian_pattern']}, local {', '.join(t['admissible_local'])}, "
            f"routes " + ", ".join(f"{k} -> {v}" for k, v in t["global_route"].items())
        )
    for e in cert.errors:
        lines.append(f"error: {e}")
    return "\n".join(lines) + "\n"
