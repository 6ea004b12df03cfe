"""Expression language for planar map components.

Grammar (``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := base ('^' UINT)?
    base   := NUMBER | IDENT '(' expr ')' | IDENT | '(' expr ')'

``x`` and ``y`` are the coordinates; any other bare identifier is a
parameter resolved at evaluation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs", "tanh")
NONSMOOTH = ("sqrt", "abs")


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class UnboundParameterError(NameError):
    pass


class MapDomainError(ArithmeticError):
    """Evaluation left the domain of some subexpression.

    ``subexpr`` is the pretty-printed offending node and ``index`` the first
    offending point of the batch.
    """

    def __init__(self, message: str, subexpr: str, index: int = 0):
        self.subexpr = subexpr
        self.index = index
        super().__init__(f"{message} in '{subexpr}'")


class NonDifferentiableError(ValueError):
    pass


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> list:
    src = src.replace("−", "-")
    tokens, pos = [], 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, tok[2], self.src)

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            self.fail(f"expected {text!r}, found {tok[1] or 'end of input'!r}", tok)

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self):
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail("exponent must be a non-negative integer literal", tok)
            node = Pow(node, int(tok[1]))
        return node

    def base(self):
        tok = self.take()
        kind, text = tok[0], tok[1]
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    self.fail(f"unknown function {text!r}", tok)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            return Var(text)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {text or 'end of input'!r}", tok)


def parse_expr(src: str) -> Node:
    """Parse ``src`` into an AST; raises :class:`ExprSyntaxError` with a position."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0, src or "")
    return _Parser(src).parse()


# ---------------------------------------------------------------- printing

def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Num) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 0
    return 5


def format_number(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {v}")
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def pretty(node: Node) -> str:
    """Canonical text form; ``parse_expr(pretty(a)) == a`` for parsed ASTs."""

    def wrap(child, min_prec):
        s = pretty(child)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(node, Num):
        s = format_number(abs(node.value))
        return f"-{s}" if _prec(node) == 0 else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({pretty(node.arg)})"
    if isinstance(node, Pow):
        return f"{wrap(node.base, 5)}^{node.exp}"
    if isinstance(node, Neg):
        return f"-{wrap(node.arg, 3)}"
    p = _prec(node)
    # same-precedence right operands keep their parentheses (left associativity)
    left, right = wrap(node.left, p), wrap(node.right, p + 1 if p == 1 else 3)
    if p == 1:
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


# ---------------------------------------------------------------- evaluation

def free_identifiers(node: Node) -> set:
    if isinstance(node, Var):
        return set() if node.name in ("x", "y") else {node.name}
    if isinstance(node, (Neg, Pow, Call)):
        return free_identifiers(node.arg if not isinstance(node, Pow) else node.base)
    if isinstance(node, BinOp):
        return free_identifiers(node.left) | free_identifiers(node.right)
    return set()


_ZERO, _CONST, _LIN = "zero", "const", "linear"


def linear_kind(node: Node, params: Mapping[str, float] = None):
    """``'zero'``, ``'const'`` or ``'linear'`` (homogeneous in x, y) when evident from
    the syntax tree; ``None`` for anything else, including affine expressions."""
    params = params or {}
    if isinstance(node, Num):
        return _ZERO if node.value == 0 else _CONST
    if isinstance(node, Var):
        if node.name in ("x", "y"):
            return _LIN
        return _ZERO if params.get(node.name) == 0 else _CONST
    if isinstance(node, Neg):
        return linear_kind(node.arg, params)
    if isinstance(node, Call):
        return _CONST if linear_kind(node.arg, params) in (_ZERO, _CONST) else None
    if isinstance(node, Pow):
        if node.exp == 0:
            return _CONST
        b = linear_kind(node.base, params)
        return b if node.exp == 1 or b in (_ZERO, _CONST) else None
    a, b = linear_kind(node.left, params), linear_kind(node.right, params)
    if a is None or b is None:
        return None
    if node.op in "+-":
        if a == _ZERO:
            return b
        if b == _ZERO or a == b:
            return a
        return None
    if node.op == "*":
        if a == _LIN and b == _LIN:
            return None
        if _ZERO in (a, b):
            return _ZERO
        return _LIN if _LIN in (a, b) else _CONST
    # division: only by a nonzero constant
    if b != _CONST:
        return None
    return a


def ipow(base, n: int):
    """Integer power by left-to-right repeated multiplication."""
    if n == 0:
        return np.ones_like(base) if isinstance(base, np.ndarray) else 1.0
    out = base
    for _ in range(n - 1):
        out = out * base
    return out


_UFUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh, "abs": np.abs}


def evaluate(node: Node, x, y, params: Mapping[str, float] = None, strict: bool = True):
    """Evaluate on arrays ``x``, ``y`` (broadcast together).

    ``strict`` raises :class:`MapDomainError` on division by zero or the square
    root of a negative number; otherwise those points become NaN.
    """
    params = params or {}
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def bad(mask, message, sub):
        if strict and np.any(mask):
            raise MapDomainError(message, pretty(sub), int(np.flatnonzero(mask)[0]))

    def ev(n):
        if isinstance(n, Num):
            return np.full(np.broadcast(x, y).shape, n.value)
        if isinstance(n, Var):
            if n.name == "x":
                return np.broadcast_to(x, np.broadcast(x, y).shape).astype(float)
            if n.name == "y":
                return np.broadcast_to(y, np.broadcast(x, y).shape).astype(float)
            if n.name not in params:
                raise UnboundParameterError(f"unbound identifier {n.name!r}")
            return np.full(np.broadcast(x, y).shape, float(params[n.name]))
        if isinstance(n, Neg):
            return -ev(n.arg)
        if isinstance(n, Pow):
            return ipow(ev(n.base), n.exp)
        if isinstance(n, Call):
            a = ev(n.arg)
            if n.fn == "sqrt":
                neg = a < 0
                bad(neg, "square root of a negative number", n)
                return np.sqrt(np.where(neg, np.nan, a))
            return _UFUNCS[n.fn](a)
        a, b = ev(n.left), ev(n.right)
        if n.op == "+":
            return a + b
        if n.op == "-":
            return a - b
        if n.op == "*":
            return a * b
        zero = b == 0
        bad(zero, "division by zero", n)
        return np.where(zero, np.nan, a / np.where(zero, 1.0, b))

    with np.errstate(all="ignore"):
        return ev(node)


def nonsmooth_at(node: Node, x: float, y: float, params: Mapping[str, float] = None) -> list:
    """Subexpressions ``abs(u)`` / ``sqrt(u)`` whose argument vanishes at ``(x, y)``."""
    found = []

    def walk(n):
        if isinstance(n, Call):
            if n.fn in NONSMOOTH and float(evaluate(n.arg, x, y, params, strict=False)) == 0.0:
                found.append(pretty(n))
            walk(n.arg)
        elif isinstance(n, (Neg,)):
            walk(n.arg)
        elif isinstance(n, Pow):
            walk(n.base)
        elif isinstance(n, BinOp):
            walk(n.left)
            walk(n.right)

    walk(node)
    return found


def substitute(node: Node, mapping: Mapping[str, Node]) -> Node:
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exp)
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
    return node


# ---------------------------------------------------------------- RPN compilation

OP_CONST, OP_X, OP_Y, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW = range(9)
OP_SIN, OP_COS, OP_EXP, OP_SQRT, OP_ABS, OP_TANH = range(9, 15)
_BIN_CODES = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}
_FN_CODES = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "sqrt": OP_SQRT, "abs": OP_ABS, "tanh": OP_TANH}


def compile_rpn(node: Node, params: Mapping[str, float], consts: list) -> tuple:
    """Post-order opcode list for the stack evaluators in the kernels.

    Returns ``(codes, args, max_depth)``; constants are appended to ``consts``.
    """
    codes, args = [], []
    depth = [0, 0]

    def push(code, arg=0, delta=0):
        codes.append(code)
        args.append(arg)
        depth[0] += delta
        depth[1] = max(depth[1], depth[0])

    def const(v):
        consts.append(float(v))
        push(OP_CONST, len(consts) - 1, 1)

    def walk(n):
        if isinstance(n, Num):
            const(n.value)
        elif isinstance(n, Var):
            if n.name == "x":
                push(OP_X, 0, 1)
            elif n.name == "y":
                push(OP_Y, 0, 1)
            elif n.name in params:
                const(params[n.name])
            else:
                raise UnboundParameterError(f"unbound identifier {n.name!r}")
        elif isinstance(n, Neg):
            walk(n.arg)
            push(OP_NEG)
        elif isinstance(n, Pow):
            walk(n.base)
            push(OP_POW, n.exp)
        elif isinstance(n, Call):
            walk(n.arg)
            push(_FN_CODES[n.fn])
        else:
            walk(n.left)
            walk(n.right)
            push(_BIN_CODES[n.op], 0, -1)

    walk(node)
    return codes, args, depth[1]
