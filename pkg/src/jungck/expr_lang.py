"""Single-variable real arithmetic expressions.

Grammar, lowest precedence first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | atom
    atom   := NUMBER | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

``VAR`` is ``x`` (maps) or ``t`` (control functions). The functions are
``abs``, ``sqrt`` (one argument) and ``min``, ``max``, ``pow`` (two).
Parsed trees are immutable and evaluation is a pure function of the tree
and the input value.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "ExprEvalError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "parse",
    "evaluate",
    "to_text",
]

VARIABLES = ("x", "t")
ARITY = {"abs": 1, "sqrt": 1, "min": 2, "max": 2, "pow": 2}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class ExprEvalError(ExprError):
    def __init__(self, message: str, node: "Node"):
        self.node = node
        super().__init__(f"{message} in '{to_text(node)}'")


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
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Neg, BinOp, Call]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/(),]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, var: str | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.var = var
        self.seen_var: str | None = None

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in ARITY:
                return self.call(text, off)
            if text in VARIABLES and (self.var is None or text == self.var):
                if self.seen_var is not None and self.seen_var != text:
                    raise UnknownIdentifierError(
                        f"second variable {text!r} (already using {self.seen_var!r})", off
                    )
                self.seen_var = text
                return Var(text)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", off)

    def call(self, name: str, off: int) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != ARITY[name]:
            raise ArityError(f"{name} takes {ARITY[name]} argument(s), got {len(args)}", off)
        return Call(name, tuple(args))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(node) -> str:
    """Canonical text of a tree (or an :class:`Expr`); re-parses to the same tree."""
    if isinstance(node, Expr):
        node = node.root
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return f"-({inner})" if _prec(node.arg) < 3 else f"-{inner}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_text(node.left)
        right = to_text(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


def _finite(value: float, node: Node) -> float:
    if not math.isfinite(value):
        raise ExprEvalError(f"non-finite result {value!r}", node)
    return value


def _compile(node: Node) -> Callable[[float], float]:
    if isinstance(node, Num):
        c = node.value
        return lambda v: c
    if isinstance(node, Var):
        return lambda v: v
    if isinstance(node, Neg):
        f = _compile(node.arg)
        return lambda v: -f(v)
    if isinstance(node, BinOp):
        f, g = _compile(node.left), _compile(node.right)
        if node.op == "+":
            return lambda v: _finite(f(v) + g(v), node)
        if node.op == "-":
            return lambda v: _finite(f(v) - g(v), node)
        if node.op == "*":
            return lambda v: _finite(f(v) * g(v), node)

        def div(v):
            den = g(v)
            if den == 0.0:
                raise ExprEvalError("division by zero", node)
            return _finite(f(v) / den, node)

        return div
    fs = [_compile(a) for a in node.args]
    name = node.name
    if name == "abs":
        f = fs[0]
        return lambda v: abs(f(v))
    if name == "min":
        f, g = fs
        return lambda v: min(f(v), g(v))
    if name == "max":
        f, g = fs
        return lambda v: max(f(v), g(v))
    if name == "sqrt":
        f = fs[0]

        def sqrt(v):
            a = f(v)
            if a < 0.0:
                raise ExprEvalError(f"square root of negative value {a!r}", node)
            return math.sqrt(a)

        return sqrt
    f, g = fs

    def power(v):
        base, exp = f(v), g(v)
        if base < 0.0 and exp != int(exp):
            raise ExprEvalError(f"negative base {base!r} with non-integer exponent", node)
        if base == 0.0 and exp < 0.0:
            raise ExprEvalError("division by zero (zero base, negative exponent)", node)
        try:
            return _finite(math.pow(base, exp), node)
        except OverflowError:
            raise ExprEvalError("overflow", node) from None

    return power


@dataclass(frozen=True)
class Expr:
    """A parsed expression; callable on a single real value."""

    root: Node
    variable: str | None = None

    @cached_property
    def _fn(self):
        return _compile(self.root)

    def __call__(self, value: float) -> float:
        return self._fn(float(value))

    def __str__(self):
        return to_text(self.root)


def parse(text: str, var: str | None = None) -> Expr:
    """Parse ``text``; ``var`` restricts the admissible variable name.

    With ``var=None`` either ``x`` or ``t`` is accepted, but not both.
    """
    if var is not None and var not in VARIABLES:
        raise ValueError(f"variable must be one of {VARIABLES}, got {var!r}")
    p = _Parser(text, var)
    root = p.parse()
    return Expr(root, p.seen_var or var)


def evaluate(e: Expr | str, value: float) -> float:
    if isinstance(e, str):
        e = parse(e)
    if not math.isfinite(value):
        raise ValueError(f"input value must be finite, got {value!r}")
    return e(value)
