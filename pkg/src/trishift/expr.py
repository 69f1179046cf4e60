"""Closed-form sequence expressions: parsing, canonical printing, evaluation.

The grammar covers the arithmetic needed to describe coefficient families
such as ``sqrt(n+1)`` or ``(-1)^n * 0.5`` with one free integer variable
``n``:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' power)?
    atom   := NUMBER | 'n' | 'sqrt' '(' expr ')' | '(' expr ')'

``^`` binds tightest and is right-associative, then unary minus, then
``*`` / ``/``, then ``+`` / ``-``.  Because ``^`` outranks unary minus, an
exponent cannot start with a bare minus sign: write ``2^(-n)``.

Evaluation is real-valued and total except for the documented error cases:
division by zero, square roots of negative numbers, non-integer exponents,
and overflow all raise :class:`EvalError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ArithmeticError):
    """The expression has no finite real value at the requested index."""


@dataclass(frozen=True)
class Num:
    """Nonnegative numeric literal (negative values arise via unary minus)."""

    value: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError("numeric literals must be finite and nonnegative")


@dataclass(frozen=True)
class Var:
    """The free integer variable ``n``."""


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Sqrt:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Neg, Sqrt, BinOp]

_NUM_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = "+-*/^()"

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, offset) triples; kind in {num, ident, op}."""
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUM_RE.match(text, pos)
        if m:
            tokens.append(("num", m.group(), pos))
            pos = m.end()
            continue
        m = _IDENT_RE.match(text, pos)
        if m:
            tokens.append(("ident", m.group(), pos))
            pos = m.end()
            continue
        if ch in _OPS:
            tokens.append(("op", ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> tuple[str, str, int] | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def _next(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of input", len(self.text))
        self.pos += 1
        return tok

    def _expect_op(self, op: str) -> None:
        tok = self._peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            offset = tok[2] if tok is not None else len(self.text)
            raise ExprSyntaxError(f"expected {op!r}", offset)
        self.pos += 1

    def parse(self) -> Node:
        node = self.expr()
        tok = self._peek()
        if tok is not None:
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while (tok := self._peek()) is not None and tok[0] == "op" and tok[1] in "+-":
            self.pos += 1
            node = BinOp(tok[1], node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (tok := self._peek()) is not None and tok[0] == "op" and tok[1] in "*/":
            self.pos += 1
            node = BinOp(tok[1], node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self._peek()
        if tok is not None and tok[0] == "op" and tok[1] == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        tok = self._peek()
        if tok is not None and tok[0] == "op" and tok[1] == "^":
            self.pos += 1
            # right associative; the exponent re-enters at power level, so a
            # bare unary minus there is a syntax error (use parentheses)
            node = BinOp("^", node, self.power())
        return node

    def atom(self) -> Node:
        tok = self._next()
        kind, text, offset = tok
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text == "n":
                return Var()
            if text == "sqrt":
                self._expect_op("(")
                inner = self.expr()
                self._expect_op(")")
                return Sqrt(inner)
            raise ExprSyntaxError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            inner = self.expr()
            self._expect_op(")")
            return inner
        raise ExprSyntaxError(f"expected a value, found {text!r}", offset)


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _print(node: Node) -> str:
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, Sqrt):
        return f"sqrt({_print(node.operand)})"
    if isinstance(node, Neg):
        inner = _print(node.operand)
        if _prec(node.operand) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    # binary: parenthesize so the printed text reparses to the same tree
    p = _prec(node)
    left, right = _print(node.left), _print(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"


def _eval(node: Node, n: int) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(n)
    if isinstance(node, Neg):
        return -_eval(node.operand, n)
    if isinstance(node, Sqrt):
        v = _eval(node.operand, n)
        if v < 0.0:
            raise EvalError(f"sqrt of negative value {v!r} at n={n}")
        return math.sqrt(v)
    left = _eval(node.left, n)
    right = _eval(node.right, n)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right == 0.0:
            raise EvalError(f"division by zero at n={n}")
        return left / right
    # '^'
    if not right.is_integer():
        raise EvalError(f"non-integer exponent {right!r} at n={n}")
    k = int(right)
    if left == 0.0 and k < 0:
        raise EvalError(f"zero raised to negative power at n={n}")
    try:
        return left**k
    except OverflowError as err:
        raise EvalError(f"overflow in {left!r}^{k} at n={n}") from err


@dataclass(frozen=True)
class SequenceExpr:
    """A parsed closed-form expression in the integer variable ``n``."""

    source_text: str
    root: Node

    def evaluate(self, n: int) -> float:
        if n < 0:
            raise ValueError("sequence index must be nonnegative")
        value = _eval(self.root, n)
        if not math.isfinite(value):
            raise EvalError(
                f"expression {self.source_text!r} is not finite at n={n}"
            )
        return value

    def canonical(self) -> str:
        """Print the AST so that parsing the result reproduces it exactly."""
        return _print(self.root)


def parse_sequence_expr(text: str) -> SequenceExpr:
    """Parse ``text`` into a :class:`SequenceExpr`.

    Raises :class:`ExprSyntaxError` (with a byte offset) on malformed input
    or unknown identifiers.
    """
    if not isinstance(text, str):
        raise ExprSyntaxError(f"expected a string, got {type(text).__name__}", 0)
    if not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    root = _Parser(text).parse()
    return SequenceExpr(source_text=text, root=root)


def expr_from_canonical(node: Node) -> SequenceExpr:
    """Wrap an AST built programmatically, using its canonical print as source."""
    return SequenceExpr(source_text=_print(node), root=node)


__all__ = [
    "BinOp",
    "EvalError",
    "ExprSyntaxError",
    "Neg",
    "Node",
    "Num",
    "SequenceExpr",
    "Sqrt",
    "Var",
    "expr_from_canonical",
    "parse_sequence_expr",
]
