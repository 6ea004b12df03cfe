"""Maps ``f(z) = sum c_jk z^j conj(z)^k`` under the identification R^2 = C."""

from __future__ import annotations

from math import comb
from typing import Mapping

import numpy as np

from .expr import BinOp, Node, Num, Pow, Var


def _clean(terms: Mapping) -> dict:
    out = {}
    for (j, k), c in terms.items():
        c = complex(c)
        if c != 0:
            out[(int(j), int(k))] = c
    return out


def _pmul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (j1, k1), c1 in p.items():
        for (j2, k2), c2 in q.items():
            key = (j1 + j2, k1 + k2)
            out[key] = out.get(key, 0) + c1 * c2
    return _clean(out)


class ComplexPolyMap:
    """Immutable complex-form polynomial map.

    ``terms`` maps ``(j, k)`` to the coefficient of ``z^j conj(z)^k``. Terms
    are kept sorted so that every evaluator sums them in the same order.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping):
        cleaned = {}
        for key, c in dict(terms).items():
            j, k = key
            if int(j) != j or int(k) != k or j < 0 or k < 0:
                raise ValueError(f"exponents must be non-negative integers, got {key}")
            c = complex(c)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise ValueError(f"coefficient of {key} is not finite")
            if c != 0:
                cleaned[(int(j), int(k))] = c
        if not cleaned:
            cleaned = {(0, 0): 0j}
        self._terms = tuple(sorted(cleaned.items()))

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms

    def __eq__(self, other):
        return isinstance(other, ComplexPolyMap) and self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        body = ", ".join(f"({j},{k}): {c!r}" for (j, k), c in self._terms)
        return f"ComplexPolyMap({{{body}}})"

    @property
    def degree(self) -> int:
        return max(j + k for (j, k), _ in self._terms)

    @property
    def is_linear(self) -> bool:
        return all(j + k == 1 for (j, k), c in self._terms if c != 0)

    def coefficient(self, j: int, k: int) -> complex:
        return self.terms.get((j, k), 0j)

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        zb = np.conj(z)
        maxj = max(j for (j, _), _ in self._terms)
        maxk = max(k for (_, k), _ in self._terms)
        zp = [np.ones_like(z)]
        for _ in range(maxj):
            zp.append(zp[-1] * z)
        zbp = [np.ones_like(z)]
        for _ in range(maxk):
            zbp.append(zbp[-1] * zb)
        acc = np.zeros_like(z)
        with np.errstate(all="ignore"):
            for (j, k), c in self._terms:
                acc = acc + (c * zp[j]) * zbp[k]
        return acc.real.copy(), acc.imag.copy()

    def wirtinger(self, x, y):
        """``(df/dz, df/dconj(z))`` at the given points."""
        z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
        zb = np.conj(z)
        dz = np.zeros_like(z)
        dzb = np.zeros_like(z)
        with np.errstate(all="ignore"):
            for (j, k), c in self._terms:
                if j:
                    dz = dz + c * j * z ** (j - 1) * zb**k
                if k:
                    dzb = dzb + c * k * z**j * zb ** (k - 1)
        return dz, dzb

    def jacobian_batch(self, x, y) -> np.ndarray:
        """Real Jacobians, shape ``(..., 2, 2)``."""
        a, b = self.wirtinger(x, y)
        out = np.empty(a.shape + (2, 2))
        out[..., 0, 0] = a.real + b.real
        out[..., 0, 1] = -a.imag + b.imag
        out[..., 1, 0] = a.imag + b.imag
        out[..., 1, 1] = a.real - b.real
        return out

    def conjugate(self) -> "ComplexPolyMap":
        """The map ``z -> conj(f(z))``."""
        return ComplexPolyMap({(k, j): c.conjugate() for (j, k), c in self._terms})

    def compose(self, inner: "ComplexPolyMap") -> "ComplexPolyMap":
        """``self(inner(z))`` as an explicit polynomial."""
        g = dict(inner.items())
        gb = dict(inner.conjugate().items())
        maxj = max(j for (j, _), _ in self._terms)
        maxk = max(k for (_, k), _ in self._terms)
        gp = [{(0, 0): 1 + 0j}]
        for _ in range(maxj):
            gp.append(_pmul(gp[-1], g))
        gbp = [{(0, 0): 1 + 0j}]
        for _ in range(maxk):
            gbp.append(_pmul(gbp[-1], gb))
        out: dict = {}
        for (j, k), c in self._terms:
            for key, v in _pmul(gp[j], gbp[k]).items():
                out[key] = out.get(key, 0) + c * v
        return ComplexPolyMap(_clean(out))

    def real_polynomials(self) -> dict:
        """Coefficients of ``x^a y^b`` in real and imaginary parts as one complex dict."""
        out: dict = {}
        for (j, k), c in self._terms:
            for a in range(j + 1):
                for b in range(k + 1):
                    coef = c * comb(j, a) * comb(k, b) * (1j) ** a * (-1j) ** b
                    key = (j + k - a - b, a + b)
                    out[key] = out.get(key, 0) + coef
        return out

    def to_expr(self) -> tuple:
        """Equivalent ``(fx, fy)`` expression ASTs."""
        poly = self.real_polynomials()
        return (
            _poly_ast({key: c.real for key, c in poly.items()}),
            _poly_ast({key: c.imag for key, c in poly.items()}),
        )


def _monomial(coef: float, a: int, b: int) -> Node:
    factors = []
    if a:
        factors.append(Var("x") if a == 1 else Pow(Var("x"), a))
    if b:
        factors.append(Var("y") if b == 1 else Pow(Var("y"), b))
    if coef != 1.0 or not factors:
        factors.insert(0, Num(coef))
    node = factors[0]
    for f in factors[1:]:
        node = BinOp("*", node, f)
    return node


def _poly_ast(poly: dict) -> Node:
    node = None
    for (a, b), c in sorted(poly.items()):
        if c == 0:
            continue
        mono = _monomial(abs(c), a, b)
        if node is None:
            node = mono if c > 0 else BinOp("-", Num(0.0), mono)
        else:
            node = BinOp("+" if c > 0 else "-", node, mono)
    return node if node is not None else Num(0.0)
