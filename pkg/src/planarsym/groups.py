"""Compact subgroups of O(2) in their canonical action on the plane.

Rotations act as ``z -> exp(i*theta) z`` and the flip as ``z -> conj(z)``,
i.e. ``kappa = diag(1, -1)``. Any reflection in an input map is assumed to
have been conjugated to ``kappa`` beforehand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .algebra import FLIP

FAMILIES = ("O2", "SO2", "Dn", "Zn", "Z2kappa", "Trivial")


@dataclass(frozen=True)
class GroupSpec:
    family: str
    n: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown group family {self.family!r}")
        if self.family in ("Dn", "Zn"):
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise ValueError(f"{self.family} needs an integer n >= 2, got {self.n!r}")
        elif self.n is not None:
            raise ValueError(f"{self.family} takes no n")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse the CLI names ``O2``, ``SO2``, ``D:<n>``, ``Z:<n>``, ``Z2k``, ``trivial``."""
        t = text.strip()
        simple = {"O2": "O2", "SO2": "SO2", "Z2k": "Z2kappa", "trivial": "Trivial"}
        if t in simple:
            return cls(simple[t])
        head, sep, tail = t.partition(":")
        if sep and head in ("D", "Z"):
            try:
                n = int(tail)
            except ValueError:
                raise ValueError(f"bad group order in {text!r}") from None
            return cls("Dn" if head == "D" else "Zn", n)
        raise ValueError(f"unknown group name {text!r}")

    def __str__(self) -> str:
        if self.family == "Dn":
            return f"D:{self.n}"
        if self.family == "Zn":
            return f"Z:{self.n}"
        return {"O2": "O2", "SO2": "SO2", "Z2kappa": "Z2k", "Trivial": "trivial"}[self.family]

    @property
    def is_continuous(self) -> bool:
        return self.family in ("O2", "SO2")

    @property
    def order(self) -> Optional[int]:
        """Number of elements, or ``None`` for the continuous groups."""
        return {"Dn": 2 * (self.n or 0), "Zn": self.n, "Z2kappa": 2, "Trivial": 1}.get(self.family)


O2 = GroupSpec("O2")
SO2 = GroupSpec("SO2")
Z2KAPPA = GroupSpec("Z2kappa")
TRIVIAL = GroupSpec("Trivial")


def dihedral(n: int) -> GroupSpec:
    return GroupSpec("Dn", n)


def cyclic(n: int) -> GroupSpec:
    return GroupSpec("Zn", n)


def rotation_by_fraction(k: int, n: int) -> np.ndarray:
    """Rotation by ``2*pi*k/n``; quarter turns are exact."""
    f = Fraction(k, n) % 1
    exact = {
        Fraction(0): (1.0, 0.0),
        Fraction(1, 4): (0.0, 1.0),
        Fraction(1, 2): (-1.0, 0.0),
        Fraction(3, 4): (0.0, -1.0),
    }
    if f in exact:
        c, s = exact[f]
    else:
        theta = 2.0 * math.pi * float(f)
        c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class Generators(NamedTuple):
    matrices: list
    continuous_rotation: bool


def generators(g: GroupSpec) -> Generators:
    fam = g.family
    if fam == "Dn":
        return Generators([rotation_by_fraction(1, g.n), FLIP.copy()], False)
    if fam == "Zn":
        return Generators([rotation_by_fraction(1, g.n)], False)
    if fam == "Z2kappa":
        return Generators([FLIP.copy()], False)
    if fam == "O2":
        return Generators([FLIP.copy()], True)
    if fam == "SO2":
        return Generators([], True)
    return Generators([], False)


def sample_elements(g: GroupSpec, resolution: int = 16) -> list:
    """All elements of a finite group, or a uniform angular sample of SO(2)/O(2).

    The identity is included. The trivial group yields an empty list.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    fam = g.family
    if fam == "Trivial":
        return []
    if fam == "Z2kappa":
        return [np.eye(2), FLIP.copy()]
    n = g.n if fam in ("Dn", "Zn") else resolution
    rots = [rotation_by_fraction(k, n) for k in range(n)]
    if fam in ("Dn", "O2"):
        return rots + [r @ FLIP for r in rots]
    return rots


def contains_flip(g: GroupSpec) -> bool:
    return g.family in ("O2", "Dn", "Z2kappa")


class SubspaceKind(str, Enum):
    ORIGIN_ONLY = "OriginOnly"
    LINE = "Line"
    PLANE = "Plane"


@dataclass(frozen=True)
class SubspaceDescriptor:
    kind: SubspaceKind
    direction: Optional[tuple] = None

    def __post_init__(self):
        if self.kind is SubspaceKind.LINE:
            if self.direction is None or abs(math.hypot(*self.direction) - 1.0) > 1e-12:
                raise ValueError("a Line needs a unit direction")
        elif self.direction is not None:
            raise ValueError("only a Line carries a direction")

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p, float)
        if self.kind is SubspaceKind.PLANE:
            return True
        if self.kind is SubspaceKind.ORIGIN_ONLY:
            return float(np.hypot(*p)) <= tol
        dx, dy = self.direction
        return abs(p[0] * dy - p[1] * dx) <= tol


def _element_fixed_subspace(m: np.ndarray, tol: float = 1e-12) -> SubspaceDescriptor:
    d = np.asarray(m, float) - np.eye(2)
    rank = int(np.linalg.matrix_rank(d, tol=tol))
    if rank == 0:
        return SubspaceDescriptor(SubspaceKind.PLANE)
    if rank == 2:
        return SubspaceDescriptor(SubspaceKind.ORIGIN_ONLY)
    # kernel of a rank-one matrix: orthogonal to its largest row
    row = d[int(np.argmax(np.linalg.norm(d, axis=1)))]
    v = np.array([-row[1], row[0]]) / np.linalg.norm(row)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return SubspaceDescriptor(SubspaceKind.LINE, (float(v[0]) + 0.0, float(v[1]) + 0.0))


def fixed_point_subspace(g) -> SubspaceDescriptor:
    """``Fix`` of a group (``GroupSpec``) or of a single 2x2 element.

    For a group this is the intersection of the fixed subspaces of its
    elements, so the flip group keeps its axis while every group containing
    a nontrivial rotation collapses to the origin.
    """
    if not isinstance(g, GroupSpec):
        return _element_fixed_subspace(np.asarray(g, float))
    if g.family == "Trivial":
        return SubspaceDescriptor(SubspaceKind.PLANE)
    if g.family == "Z2kappa":
        return SubspaceDescriptor(SubspaceKind.LINE, (1.0, 0.0))
    # every other canonical group contains a rotation by a nonzero angle < 2*pi
    return SubspaceDescriptor(SubspaceKind.ORIGIN_ONLY)
