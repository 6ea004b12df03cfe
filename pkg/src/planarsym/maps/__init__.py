"""Planar map representations: complex polynomials and parsed expressions."""

from .cpoly import ComplexPolyMap
from .expr import (
    ExprSyntaxError,
    MapDomainError,
    NonDifferentiableError,
    UnboundParameterError,
    parse_expr,
    pretty,
)
from .spec import (
    ExprMap,
    Jacobian2,
    JacobianMode,
    MapSpec,
    MapSpecError,
    load_map_spec,
    map_from_json_dict,
)

__all__ = [
    "ComplexPolyMap",
    "ExprMap",
    "ExprSyntaxError",
    "Jacobian2",
    "JacobianMode",
    "MapDomainError",
    "MapSpec",
    "MapSpecError",
    "NonDifferentiableError",
    "UnboundParameterError",
    "load_map_spec",
    "map_from_json_dict",
    "parse_expr",
    "pretty",
]
