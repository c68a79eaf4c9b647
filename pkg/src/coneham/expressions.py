"""A small arithmetic expression language for problem files.

Grammar (standard precedence, left-associative):

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | atom
    atom  := NUMBER | name '(' expr (',' expr)* ')' | name | '(' expr ')'

Unary minus binds tighter than '*' and '/'.  Names are the variables t, s,
v and the functions abs, min, max, exp, sqrt.  Every syntax or evaluation
error carries the byte offset of the offending token; division by zero is
the only runtime failure on finite inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ExpressionEvalError, ExpressionSyntaxError

VARIABLES = ("t", "s", "v")

FUNCTIONS: dict[str, tuple[int, object]] = {
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
    "exp": (1, np.exp),
    "sqrt": (1, np.sqrt),
}


# --- AST ---------------------------------------------------------------
# Offsets are bookkeeping for error messages, not part of a node's identity:
# pretty-printing then re-parsing must reproduce an equal AST.


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    offset: int = field(default=0, compare=False)


Expr = Num | Var | Neg | BinOp | Call


# --- tokenizer ---------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = pos + (len(text[pos:]) - len(stripped))
            raise ExpressionSyntaxError(f"unexpected character {text[bad_at]!r}", bad_at)
        for kind in ("num", "name", "op"):
            got = m.group(kind)
            if got is not None:
                tokens.append(_Token(kind, got, m.start(kind)))
                break
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# --- parser ------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        raise ExpressionSyntaxError(f"expected {what}", tok.offset)

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            node = BinOp(op.text, node, self.term(), offset=op.offset)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), offset=op.offset)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary(), offset=tok.offset)
        return self.atom()

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text), offset=tok.offset)
        if tok.kind == "name":
            if self.peek().kind == "op" and self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise ExpressionSyntaxError(f"unknown function {tok.text!r}", tok.offset)
                arity = FUNCTIONS[tok.text][0]
                self.advance()  # "("
                args = [self.expr()]
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")", "')' closing the argument list")
                if len(args) != arity:
                    raise ExpressionSyntaxError(
                        f"{tok.text} takes {arity} argument(s), got {len(args)}", tok.offset
                    )
                return Call(tok.text, tuple(args), offset=tok.offset)
            if tok.text not in VARIABLES:
                raise ExpressionSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)
            return Var(tok.text, offset=tok.offset)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")", "')' closing the parenthesis")
            return node
        if tok.kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", tok.offset)
        raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.offset)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


# --- evaluation --------------------------------------------------------


def evaluate(node: Expr, env: Mapping[str, object]):
    """Evaluate with numpy semantics; ``env`` maps variable names to scalars
    or arrays (broadcast as usual)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name not in env:
            raise ExpressionEvalError(f"variable {node.name!r} is not bound here", node.offset)
        return env[node.name]
    if isinstance(node, Neg):
        return -np.asarray(evaluate(node.arg, env))
    if isinstance(node, BinOp):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        if node.op == "+":
            return np.add(left, right)
        if node.op == "-":
            return np.subtract(left, right)
        if node.op == "*":
            return np.multiply(left, right)
        if np.any(np.asarray(right) == 0):
            raise ExpressionEvalError("division by zero", node.offset)
        return np.divide(left, right)
    fn = FUNCTIONS[node.name][1]
    return fn(*(evaluate(a, env) for a in node.args))


def vars_used(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return vars_used(node.arg)
    if isinstance(node, BinOp):
        return vars_used(node.left) | vars_used(node.right)
    if isinstance(node, Call):
        out: set[str] = set()
        for a in node.args:
            out |= vars_used(a)
        return out
    return set()


# --- printing ----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def pretty(node: Expr) -> str:
    """Minimal-parenthesis rendering whose re-parse reproduces the AST
    shape exactly (so the right operand of any binary operator is
    parenthesized whenever it binds no tighter than the operator)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = pretty(node.arg)
        if _prec(node.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        left = pretty(node.left)
        right = pretty(node.right)
        if _prec(node.left) < _PREC[node.op]:
            left = f"({left})"
        if _prec(node.right) <= _PREC[node.op]:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    return f"{node.name}({', '.join(pretty(a) for a in node.args)})"
