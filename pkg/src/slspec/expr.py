"""Complex arithmetic expressions with a single free variable.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | "+" unary | power ;
    power   = primary [ "^" unary ] ;
    primary = number | name | name "(" expr ")" | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ ... ] ;

``^`` binds tighter than unary minus (so ``-x^2`` is ``-(x^2)``) and is
right-associative.  The names ``i``, ``pi`` and ``e`` are constants; every
other bare name must be the free variable of the parsing context.  There is
no implicit multiplication.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ExprSyntaxError",
    "ExprEvalError",
    "Num",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "FUNCTIONS",
    "CONSTANTS",
    "parse",
]

CONSTANTS = {"i": 1j, "pi": complex(math.pi), "e": complex(math.e)}

FUNCTIONS = (
    "sin", "cos", "tan", "exp", "log", "sqrt",
    "sinh", "cosh", "abs", "re", "im", "conj",
)

_MAX_DEPTH = 200


class ExprError(ValueError):
    """Base class for parse and evaluation failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.message = message
        self.offset = offset


class ExprEvalError(ExprError):
    def __init__(self, message: str, binding=None):
        super().__init__(f"{message} (binding={binding!r})")
        self.message = message
        self.binding = binding


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Call]


def _format(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_format(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_format(node.left)} {node.op} {_format(node.right)})"
    return f"{node.func}({_format(node.arg)})"


# -- evaluation --------------------------------------------------------------

def _scalar_funcs():
    return {
        "sin": cmath.sin, "cos": cmath.cos, "tan": cmath.tan,
        "exp": cmath.exp, "log": cmath.log, "sqrt": cmath.sqrt,
        "sinh": cmath.sinh, "cosh": cmath.cosh,
        "abs": lambda z: complex(abs(z)),
        "re": lambda z: complex(z.real),
        "im": lambda z: complex(z.imag),
        "conj": lambda z: z.conjugate(),
    }


def _array_funcs():
    return {
        "sin": np.sin, "cos": np.cos, "tan": np.tan,
        "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
        "sinh": np.sinh, "cosh": np.cosh,
        "abs": lambda z: np.abs(z).astype(complex),
        "re": lambda z: np.real(z).astype(complex),
        "im": lambda z: np.imag(z).astype(complex),
        "conj": np.conj,
    }


_SCALAR = _scalar_funcs()
_ARRAY = _array_funcs()


def _compile(node: Node, funcs) -> Callable:
    """Turn an AST into a tree of closures over the binding value."""
    if isinstance(node, Num):
        v = complex(node.value)
        return lambda z: v
    if isinstance(node, Const):
        v = CONSTANTS[node.name]
        return lambda z: v
    if isinstance(node, Var):
        return lambda z: z
    if isinstance(node, Neg):
        f = _compile(node.operand, funcs)
        return lambda z: -f(z)
    if isinstance(node, Call):
        g = funcs[node.func]
        f = _compile(node.arg, funcs)
        return lambda z: g(f(z))
    lhs = _compile(node.left, funcs)
    rhs = _compile(node.right, funcs)
    op = node.op
    if op == "+":
        return lambda z: lhs(z) + rhs(z)
    if op == "-":
        return lambda z: lhs(z) - rhs(z)
    if op == "*":
        return lambda z: lhs(z) * rhs(z)
    if op == "/":
        return lambda z: lhs(z) / rhs(z)
    if funcs is _ARRAY:
        return lambda z: np.power(lhs(z), rhs(z))
    return lambda z: lhs(z) ** rhs(z)


def _contains_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _contains_var(node.operand)
    if isinstance(node, Call):
        return _contains_var(node.arg)
    if isinstance(node, BinOp):
        return _contains_var(node.left) or _contains_var(node.right)
    return False


class Expr:
    """A parsed expression.  Immutable; evaluation is reentrant."""

    __slots__ = ("ast", "free_var", "source", "_scalar", "_array")

    def __init__(self, ast: Node, free_var: str, source: str | None = None):
        object.__setattr__(self, "ast", ast)
        object.__setattr__(self, "free_var", free_var)
        object.__setattr__(self, "source", source if source is not None else _format(ast))
        object.__setattr__(self, "_scalar", _compile(ast, _SCALAR))
        object.__setattr__(self, "_array", _compile(ast, _ARRAY))

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __reduce__(self):
        return (Expr, (self.ast, self.free_var, self.source))

    def __str__(self) -> str:
        return _format(self.ast)

    def __repr__(self) -> str:
        return f"Expr({self.source!r}, free_var={self.free_var!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.ast == other.ast and self.free_var == other.free_var

    def __hash__(self) -> int:
        return hash((self.ast, self.free_var))

    @property
    def is_constant(self) -> bool:
        return not _contains_var(self.ast)

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Evaluate at ``z`` (a number or an array of numbers).

        Raises :class:`ExprEvalError` if any result is not finite.
        """
        if np.ndim(z) == 0 and not isinstance(z, np.ndarray):
            try:
                out = self._scalar(complex(z))
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise ExprEvalError(f"evaluation of {self.source!r} failed: {exc}", z) from None
            out = complex(out)
            if not cmath.isfinite(out):
                raise ExprEvalError(f"non-finite value from {self.source!r}", z)
            return out
        zz = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._array(zz)
        out = np.broadcast_to(np.asarray(out, dtype=complex), zz.shape).copy()
        bad = ~np.isfinite(out)
        if bad.any():
            first = zz[bad][0] if zz.ndim else zz[()]
            raise ExprEvalError(f"non-finite value from {self.source!r}", complex(first))
        return out

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        """Array evaluation for 1-D ``z``; same error contract as :meth:`eval`."""
        with np.errstate(all="ignore"):
            out = self._array(z)
        if np.ndim(out) == 0:
            out = np.full(z.shape, out, dtype=complex)
        if not np.isfinite(out).all():
            first = np.asarray(z)[~np.isfinite(out)][0]
            raise ExprEvalError(f"non-finite value from {self.source!r}", complex(first))
        return out

    def eval_unchecked(self, z: complex) -> complex:
        """Scalar evaluation without the finiteness check (hot loops)."""
        return self._scalar(z)


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, free_var: str):
        self.text = text
        self.n = len(text)
        self.pos = 0
        self.free_var = free_var
        self.depth = 0
        self.tok = None
        self.tok_start = 0
        self.advance()

    def offset(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8", "surrogatepass"))

    def error(self, message: str, pos: int | None = None):
        raise ExprSyntaxError(message, self.offset(self.tok_start if pos is None else pos))

    def advance(self):
        text, n = self.text, self.n
        p = self.pos
        while p < n and text[p] in " \t\r\n":
            p += 1
        self.tok_start = p
        if p >= n:
            self.tok = ("end", None)
            self.pos = p
            return
        c = text[p]
        if c.isascii() and (c.isdigit() or (c == "." and p + 1 < n and text[p + 1].isascii() and text[p + 1].isdigit())):
            q = p
            while q < n and text[q].isascii() and text[q].isdigit():
                q += 1
            if q < n and text[q] == ".":
                q += 1
                while q < n and text[q].isascii() and text[q].isdigit():
                    q += 1
            if q < n and text[q] in "eE":
                r = q + 1
                if r < n and text[r] in "+-":
                    r += 1
                if r < n and text[r].isascii() and text[r].isdigit():
                    while r < n and text[r].isascii() and text[r].isdigit():
                        r += 1
                    q = r
            value = float(text[p:q])
            if not math.isfinite(value):
                self.error("numeric literal out of range", p)
            if q < n and (text[q].isascii() and (text[q].isalpha() or text[q] == "_")):
                self.error("implicit multiplication is not supported", q)
            self.tok = ("num", value)
            self.pos = q
            return
        if c.isascii() and (c.isalpha() or c == "_"):
            q = p
            while q < n and text[q].isascii() and (text[q].isalnum() or text[q] == "_"):
                q += 1
            self.tok = ("name", text[p:q])
            self.pos = q
            return
        if c in "+-*/^()":
            self.tok = ("op", c)
            self.pos = p + 1
            return
        self.error(f"unexpected character {c!r}", p)

    def expect(self, op: str):
        if self.tok != ("op", op):
            self.error(f"expected {op!r}")
        self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            self.error("expression nested too deeply")

    def parse(self) -> Node:
        node = self.expr()
        if self.tok[0] != "end":
            self.error("unexpected token")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok in (("op", "+"), ("op", "-")):
            op = self.tok[1]
            self.advance()
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok in (("op", "*"), ("op", "/")):
            op = self.tok[1]
            self.advance()
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        self.enter()
        try:
            if self.tok == ("op", "-"):
                self.advance()
                return Neg(self.unary())
            if self.tok == ("op", "+"):
                self.advance()
                return self.unary()
            return self.power()
        finally:
            self.depth -= 1

    def power(self) -> Node:
        base = self.primary()
        if self.tok == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        kind, value = self.tok
        if kind == "num":
            self.advance()
            return Num(value)
        if kind == "name":
            start = self.tok_start
            self.advance()
            if self.tok == ("op", "("):
                if value not in FUNCTIONS:
                    self.error(f"unknown function {value!r}", start)
                self.advance()
                self.enter()
                arg = self.expr()
                self.depth -= 1
                self.expect(")")
                return Call(value, arg)
            if value in FUNCTIONS:
                self.error(f"function {value!r} requires an argument", start)
            if value == self.free_var:
                return Var(value)
            if value in CONSTANTS:
                return Const(value)
            if value in ("x", "mu"):
                self.error(f"wrong free variable {value!r} (expected {self.free_var!r})", start)
            self.error(f"unknown identifier {value!r}", start)
        if self.tok == ("op", "("):
            self.advance()
            self.enter()
            node = self.expr()
            self.depth -= 1
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {value!r}")


def parse(source: str | bytes, free_var: str = "x") -> Expr:
    """Parse ``source`` into an :class:`Expr` in the variable ``free_var``.

    >>> parse("exp(2*i*x)", "x").eval(0)
    (1+0j)
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            text = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("invalid UTF-8", exc.start) from None
    else:
        text = source
    if free_var in CONSTANTS or free_var in FUNCTIONS:
        raise ValueError(f"{free_var!r} cannot be a free variable name")
    ast = _Parser(text, free_var).parse()
    return Expr(ast, free_var, text)
