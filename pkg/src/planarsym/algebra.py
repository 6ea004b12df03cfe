"""2x2 linear algebra: eigenvalues, commutators and adapted inner products.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)``; points are arrays of
shape ``(2,)``. Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class AdaptedNormError(ValueError):
    """Raised when ``alpha < |lambda| < beta`` fails for some eigenvalue."""


def as_mat2(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_vec2(p) -> np.ndarray:
    v = np.asarray(p, dtype=float).reshape(-1)
    if v.shape != (2,):
        raise ValueError(f"expected a point in the plane, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("point coordinates must be finite")
    return v


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


FLIP = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class EigenPair:
    lambda1: complex
    lambda2: complex
    defective: bool

    @property
    def moduli(self) -> tuple[float, float]:
        return abs(self.lambda1), abs(self.lambda2)

    @property
    def spectral_radius(self) -> float:
        return max(self.moduli)

    @property
    def is_real(self) -> bool:
        return self.lambda1.imag == 0.0 and self.lambda2.imag == 0.0


def repeated_threshold(a: np.ndarray) -> float:
    return 1e-9 * (1.0 + float(np.max(np.abs(a))))


def _is_scalar(a: np.ndarray, thr: float) -> bool:
    return abs(a[0, 1]) <= thr and abs(a[1, 0]) <= thr and abs(a[0, 0] - a[1, 1]) <= thr


def eig2(a) -> EigenPair:
    """Both roots of the characteristic polynomial of a 2x2 matrix.

    Real roots use the cancellation-free form of the quadratic formula. A
    repeated eigenvalue of a non-scalar matrix is flagged ``defective``.
    """
    a = as_mat2(a)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    half = 0.5 * tr
    # (a11 - a22)^2/4 + a12*a21 avoids cancelling tr^2/4 against det
    disc = 0.25 * (a[0, 0] - a[1, 1]) ** 2 + a[0, 1] * a[1, 0]
    thr = repeated_threshold(a)
    if disc >= 0.0:
        root = math.sqrt(disc)
        big = half + math.copysign(root, half) if half != 0.0 else root
        if big != 0.0:
            l1, l2 = complex(big), complex(det / big)
        else:
            l1, l2 = complex(root), complex(-root)
    else:
        root = math.sqrt(-disc)
        l1, l2 = complex(half, root), complex(half, -root)
    repeated = abs(l1 - l2) < thr
    if repeated:
        l1 = l2 = complex(half)
    return EigenPair(l1, l2, defective=repeated and not _is_scalar(a, thr))


def commutator_residual(a, m) -> float:
    """Max-entry absolute value of ``AM - MA``."""
    a, m = as_mat2(a), as_mat2(m)
    return float(np.max(np.abs(a @ m - m @ a)))


@dataclass(frozen=True)
class InnerProduct2:
    """Inner product ``<u, v>_G = u^T G v`` given by a symmetric Gram matrix."""

    g11: float
    g12: float
    g22: float

    def __post_init__(self):
        if not (self.g11 > 0 and self.g11 * self.g22 - self.g12**2 > 0):
            raise ValueError("Gram matrix is not positive definite")

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "InnerProduct2":
        """Inner product in which the columns of ``basis`` are orthonormal."""
        inv = np.linalg.inv(basis)
        g = inv.T @ inv
        return cls(float(g[0, 0]), float(0.5 * (g[0, 1] + g[1, 0])), float(g[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])

    def inner(self, u, v) -> np.ndarray:
        u, v = np.asarray(u, float), np.asarray(v, float)
        return (
            self.g11 * u[..., 0] * v[..., 0]
            + self.g12 * (u[..., 0] * v[..., 1] + u[..., 1] * v[..., 0])
            + self.g22 * u[..., 1] * v[..., 1]
        )

    def norm(self, u) -> np.ndarray:
        """G-norm along the last axis; accepts a single point or a batch."""
        return np.sqrt(self.inner(u, u))

    def gain_bounds(self, a) -> tuple[float, float]:
        """Exact ``min`` and ``max`` of ``|Ax|_G / |x|_G`` over nonzero ``x``."""
        c = np.linalg.cholesky(self.matrix).T  # |x|_G = |c x|
        return _singular_values(c @ as_mat2(a) @ np.linalg.inv(c))


def _real_eigenvector(a: np.ndarray, lam: float) -> np.ndarray:
    c1 = np.array([a[0, 1], lam - a[0, 0]])
    c2 = np.array([lam - a[1, 1], a[1, 0]])
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    return v / np.linalg.norm(v)


def _singular_values(b: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(b, compute_uv=False)
    return float(s[-1]), float(s[0])


def adapted_basis(a, alpha: float, beta: float) -> np.ndarray:
    """Columns form a basis in which ``alpha|x| <= |Ax| <= beta|x|``."""
    a = as_mat2(a)
    ep = eig2(a)
    if not alpha > 0.0:
        raise AdaptedNormError(f"alpha must be positive, got {alpha}")
    for name, lam in (("lambda1", ep.lambda1), ("lambda2", ep.lambda2)):
        mod = abs(lam)
        if not alpha < mod:
            raise AdaptedNormError(f"{name} = {lam} has |{name}| = {mod} <= alpha = {alpha}")
        if not mod < beta:
            raise AdaptedNormError(f"{name} = {lam} has |{name}| = {mod} >= beta = {beta}")

    thr = repeated_threshold(a)
    if _is_scalar(a, thr):
        return np.eye(2)

    if ep.defective:
        lam = ep.lambda1.real
        nil = a - lam * np.eye(2)
        j = int(np.argmax(np.linalg.norm(nil, axis=0)))
        v = nil[:, j] / np.linalg.norm(nil[:, j])
        ell = nil.T @ v  # nil ~ v ell^T
        w = ell / float(ell @ ell)
        mod = abs(lam)
        eps = 0.5 * min(beta - mod, mod - alpha) * mod
        for _ in range(21):
            basis = np.column_stack([v, eps * w])
            if not abs(np.linalg.det(basis)) > 0.0:
                break  # eps underflowed; no usable scaling at this precision
            lo, hi = _singular_values(np.linalg.solve(basis, a @ basis))
            if alpha <= lo and hi <= beta:
                return basis
            eps *= 0.5
        raise AdaptedNormError("defective case: no admissible nilpotent scaling found")

    if ep.is_real:
        basis = np.column_stack(
            [_real_eigenvector(a, ep.lambda1.real), _real_eigenvector(a, ep.lambda2.real)]
        )
    else:
        lam = ep.lambda1 if ep.lambda1.imag > 0 else ep.lambda2
        c1 = np.array([a[0, 1], lam - a[0, 0]], dtype=complex)
        c2 = np.array([lam - a[1, 1], a[1, 0]], dtype=complex)
        v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        v = v / np.linalg.norm(v)
        basis = np.column_stack([v.real, v.imag])
    lo, hi = _singular_values(np.linalg.solve(basis, a @ basis))
    slack = 1e-12 * max(1.0, beta)
    if lo < alpha - slack or hi > beta + slack:
        raise AdaptedNormError(f"adapted basis check failed: singular values ({lo}, {hi})")
    return basis


def adapted_inner_product(a, alpha: float, beta: float) -> InnerProduct2:
    """Inner product whose norm pinches ``A`` between ``alpha`` and ``beta``.

    Real distinct eigenvalues use the eigenbasis, a complex pair uses the real
    basis in which ``A`` is a rotation-scaling, and a defective matrix uses
    ``{v, eps*w}`` with ``(A - lambda I) w = v`` for a small enough ``eps``.
    """
    return InnerProduct2.from_basis(adapted_basis(a, alpha, beta))

