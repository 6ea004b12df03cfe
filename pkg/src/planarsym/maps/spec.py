"""``MapSpec``: a named planar map in complex-polynomial or expression form."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple, Optional, Union

import numpy as np

from ..algebra import as_vec2
from .cpoly import ComplexPolyMap
from .expr import (
    ExprSyntaxError,
    Node,
    NonDifferentiableError,
    UnboundParameterError,
    compile_rpn,
    evaluate,
    free_identifiers,
    linear_kind,
    nonsmooth_at,
    parse_expr,
    pretty,
    substitute,
)


class MapSpecError(ValueError):
    """Malformed map specification; ``path`` locates the problem (``$.terms[1].j``)."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ExprMap:
    fx: Node
    fy: Node


class JacobianMode(str, Enum):
    ANALYTIC = "Analytic"
    FINITE_DIFFERENCE = "FiniteDifference"


@dataclass(frozen=True)
class Jacobian2:
    matrix: np.ndarray
    mode: JacobianMode
    step: Optional[float] = None

    def __post_init__(self):
        if (self.mode is JacobianMode.FINITE_DIFFERENCE) != (self.step is not None):
            raise ValueError("step is present iff the Jacobian is a finite difference")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("Jacobian entries are not finite")


class MapProgram(NamedTuple):
    """Flat arrays consumed by the orbit kernels."""

    kind: int  # 0 complex polynomial, 1 expression
    js: np.ndarray
    ks: np.ndarray
    cre: np.ndarray
    cim: np.ndarray
    code_x: np.ndarray
    arg_x: np.ndarray
    code_y: np.ndarray
    arg_y: np.ndarray
    consts: np.ndarray
    stack_size: int


def fd_step(p) -> float:
    return 1e-5 * (1.0 + float(np.hypot(p[0], p[1])))


@dataclass(frozen=True, eq=False)
class MapSpec:
    name: str
    form: Union[ComplexPolyMap, ExprMap]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def cpoly(cls, terms: Mapping, name: str = "cpoly") -> "MapSpec":
        return cls(name, ComplexPolyMap(terms))

    @classmethod
    def expr(cls, fx: str, fy: str, params: Mapping[str, float] = None, name: str = "expr"):
        return cls(name, ExprMap(parse_expr(fx), parse_expr(fy)), params or {})

    @property
    def is_polynomial(self) -> bool:
        return isinstance(self.form, ComplexPolyMap)

    @property
    def is_linear(self) -> bool:
        """Exactly linear, as read off the coefficients or the syntax tree."""
        if self.is_polynomial:
            return self.form.is_linear
        kinds = (linear_kind(self.form.fx, self.params), linear_kind(self.form.fy, self.params))
        return all(k in ("zero", "linear") for k in kinds)

    def unbound(self) -> set:
        if self.is_polynomial:
            return set()
        return (free_identifiers(self.form.fx) | free_identifiers(self.form.fy)) - set(self.params)

    # ------------------------------------------------------------ evaluation

    def evaluate(self, x, y, strict: bool = True):
        """Vectorised image ``(u, v)`` of the points ``(x, y)``."""
        if self.is_polynomial:
            return self.form.evaluate(x, y)
        u = evaluate(self.form.fx, x, y, self.params, strict)
        v = evaluate(self.form.fy, x, y, self.params, strict)
        return u, v

    def __call__(self, p) -> np.ndarray:
        p = as_vec2(p)
        u, v = self.evaluate(p[0], p[1])
        return np.array([float(u), float(v)])

    def evaluate_points(self, pts, strict: bool = True) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        u, v = self.evaluate(pts[:, 0], pts[:, 1], strict)
        return np.column_stack([u, v])

    def jacobian(self, p, h: Optional[float] = None, richardson: bool = True) -> Jacobian2:
        """Jacobian at ``p``: analytic for polynomials, central differences otherwise.

        Finite differences use ``h = 1e-5 (1 + |p|)`` by default and, with
        ``richardson``, combine steps ``h`` and ``h/2`` to cancel the ``h^2``
        error term. Points where an ``abs``/``sqrt`` argument vanishes are
        rejected with :class:`NonDifferentiableError`.
        """
        p = as_vec2(p)
        if self.is_polynomial:
            return Jacobian2(self.form.jacobian_batch(p[0], p[1]), JacobianMode.ANALYTIC)
        kinks = nonsmooth_at(self.form.fx, p[0], p[1], self.params) + nonsmooth_at(
            self.form.fy, p[0], p[1], self.params
        )
        if kinks:
            raise NonDifferentiableError(
                f"not differentiable at ({float(p[0])}, {float(p[1])}): {', '.join(sorted(set(kinks)))}"
            )
        h = fd_step(p) if h is None else float(h)

        def central(step):
            xs = p[0] + np.array([step, -step, 0.0, 0.0])
            ys = p[1] + np.array([0.0, 0.0, step, -step])
            u, v = self.evaluate(xs, ys)
            return np.array(
                [
                    [(u[0] - u[1]) / (2 * step), (u[2] - u[3]) / (2 * step)],
                    [(v[0] - v[1]) / (2 * step), (v[2] - v[3]) / (2 * step)],
                ]
            )

        jac = central(h)
        if richardson:
            jac = (4.0 * central(0.5 * h) - jac) / 3.0
        return Jacobian2(jac, JacobianMode.FINITE_DIFFERENCE, h)

    def jacobian_batch(self, pts) -> np.ndarray:
        """Jacobians at a batch of points, shape ``(N, 2, 2)``; NaN where undefined."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if self.is_polynomial:
            return self.form.jacobian_batch(pts[:, 0], pts[:, 1])
        h = 1e-5 * (1.0 + np.hypot(pts[:, 0], pts[:, 1]))
        out = np.empty((len(pts), 2, 2))
        for col, (dx, dy) in enumerate(((h, 0 * h), (0 * h, h))):
            up = self.evaluate(pts[:, 0] + dx, pts[:, 1] + dy, strict=False)
            dn = self.evaluate(pts[:, 0] - dx, pts[:, 1] - dy, strict=False)
            out[:, 0, col] = (up[0] - dn[0]) / (2 * h)
            out[:, 1, col] = (up[1] - dn[1]) / (2 * h)
        return out

    def self_compose(self) -> "MapSpec":
        """``f o f`` as a map of the same form (explicit polynomial or substituted AST)."""
        name = f"{self.name}^2"
        if self.is_polynomial:
            return MapSpec(name, self.form.compose(self.form))
        sub = {"x": self.form.fx, "y": self.form.fy}
        return MapSpec(
            name, ExprMap(substitute(self.form.fx, sub), substitute(self.form.fy, sub)), self.params
        )

    def as_expr(self) -> "MapSpec":
        if not self.is_polynomial:
            return self
        fx, fy = self.form.to_expr()
        return MapSpec(self.name, ExprMap(fx, fy))

    def program(self) -> MapProgram:
        empty_i = np.zeros(0, dtype=np.int32)
        if self.is_polynomial:
            items = self.form.items()
            return MapProgram(
                0,
                np.array([j for (j, _), _ in items], dtype=np.int64),
                np.array([k for (_, k), _ in items], dtype=np.int64),
                np.array([c.real for _, c in items]),
                np.array([c.imag for _, c in items]),
                empty_i, empty_i, empty_i, empty_i,
                np.zeros(0), 1,
            )
        missing = self.unbound()
        if missing:
            raise UnboundParameterError(f"unbound identifiers: {sorted(missing)}")
        consts: list = []
        cx, ax, dx = compile_rpn(self.form.fx, self.params, consts)
        cy, ay, dy = compile_rpn(self.form.fy, self.params, consts)
        empty_l = np.zeros(0, dtype=np.int64)
        return MapProgram(
            1, empty_l, empty_l, np.zeros(0), np.zeros(0),
            np.array(cx, dtype=np.int32), np.array(ax, dtype=np.int32),
            np.array(cy, dtype=np.int32), np.array(ay, dtype=np.int32),
            np.array(consts, dtype=float), max(dx, dy, 1),
        )

    # ------------------------------------------------------------ JSON

    def to_json_dict(self) -> dict:
        if self.is_polynomial:
            terms = [
                {"j": j, "k": k, "re": c.real, "im": c.imag} for (j, k), c in self.form.items()
            ]
            return {"name": self.name, "form": "cpoly", "terms": terms, "params": dict(self.params)}
        return {
            "name": self.name,
            "form": "expr",
            "fx": pretty(self.form.fx),
            "fy": pretty(self.form.fy),
            "params": dict(self.params),
        }


def _num(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MapSpecError(f"expected a number, got {value!r}", path)
    if not np.isfinite(value):
        raise MapSpecError("number is not finite", path)
    return float(value)


def map_from_json_dict(data) -> MapSpec:
    if not isinstance(data, dict):
        raise MapSpecError("expected an object")
    name = data.get("name", "map")
    if not isinstance(name, str):
        raise MapSpecError("name must be a string", "$.name")
    params_raw = data.get("params", {})
    if not isinstance(params_raw, dict):
        raise MapSpecError("params must be an object", "$.params")
    params = {str(k): _num(v, f"$.params.{k}") for k, v in params_raw.items()}
    form = data.get("form")
    if form == "cpoly":
        terms_raw = data.get("terms")
        if not isinstance(terms_raw, list) or not terms_raw:
            raise MapSpecError("cpoly needs a non-empty list of terms", "$.terms")
        terms = {}
        for i, t in enumerate(terms_raw):
            path = f"$.terms[{i}]"
            if not isinstance(t, dict):
                raise MapSpecError("term must be an object", path)
            for key in ("j", "k"):
                v = t.get(key)
                if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                    raise MapSpecError("exponent must be a non-negative integer", f"{path}.{key}")
            jk = (t["j"], t["k"])
            if jk in terms:
                raise MapSpecError(f"duplicate term {jk}", path)
            re_ = _num(t.get("re", 0.0), f"{path}.re")
            im_ = _num(t.get("im", 0.0), f"{path}.im")
            terms[jk] = complex(re_, im_)
        return MapSpec(name, ComplexPolyMap(terms), params)
    if form == "expr":
        asts = []
        for key in ("fx", "fy"):
            src = data.get(key)
            if not isinstance(src, str):
                raise MapSpecError("expected an expression string", f"$.{key}")
            try:
                asts.append(parse_expr(src))
            except ExprSyntaxError as exc:
                raise MapSpecError(str(exc), f"$.{key}") from None
        spec = MapSpec(name, ExprMap(*asts), params)
        missing = spec.unbound()
        if missing:
            raise MapSpecError(f"unbound identifiers {sorted(missing)}", "$.params")
        return spec
    raise MapSpecError(f"form must be 'cpoly' or 'expr', got {form!r}", "$.form")


def load_map_spec(path) -> MapSpec:
    with open(os.fspath(path), encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MapSpecError(f"invalid JSON: {exc}") from None
    return map_from_json_dict(data)
