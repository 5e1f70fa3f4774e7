"""Scalar-field expressions over named coordinates with forward-mode derivatives.

Everything downstream (potentials, 1-form coefficients, constitutive laws) is
built from these expressions.  Evaluation propagates exact first and second
derivatives through the syntax tree using second-order dual numbers, so
curl/closeness residuals are limited only by round-off, not by finite
difference noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Expression",
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "ScalarField",
    "ExprError",
    "ParseError",
    "BindError",
    "DomainError",
    "parse",
    "serialize",
    "free_names",
    "evaluate",
    "grad",
    "hessian",
    "differentiate",
    "const",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
]


class ExprError(Exception):
    """Base class for expression-layer failures."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " | ".join(expected) + ")"
        super().__init__(detail)


class BindError(ExprError):
    """Unresolved or duplicate coordinate name."""


class DomainError(ExprError):
    """Evaluation left the function's real domain (pole, log of <=0, ...)."""

    def __init__(self, message: str, subexpr: "Expression | None" = None, value: float | None = None):
        self.subexpr = subexpr
        self.value = value
        if subexpr is not None:
            message += f" in '{serialize(subexpr)}'"
        if value is not None:
            message += f" (value {value!r})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expression", ...]


Expression = Num | Var | Neg | Bin | Call

_FUNCTIONS = {"exp": 1, "ln": 1, "sqrt": 1, "abs": 1, "pow": 2}


# ---------------------------------------------------------------------------
# Parser: recursive descent, precedence low->high:
#   additive < multiplicative < unary minus < power (right assoc) < primary
# ---------------------------------------------------------------------------

_TOK_NUM = "number"
_TOK_NAME = "name"
_TOK_OP = "op"
_TOK_END = "end"


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                value = float(lexeme)
            except ValueError:
                raise ParseError(f"malformed number '{lexeme}'", i) from None
            tokens.append((_TOK_NUM, value, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((_TOK_NAME, text[i:j], i))
            i = j
        elif c in "+-*/^(),":
            tokens.append((_TOK_OP, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append((_TOK_END, None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.peek()
        if kind != _TOK_OP or val != op:
            raise ParseError("unexpected token", off, (repr(op),))
        return self.advance()

    def parse(self) -> Expression:
        e = self.additive()
        kind, _, off = self.peek()
        if kind != _TOK_END:
            raise ParseError("trailing input", off, ("end of input",))
        return e

    def additive(self) -> Expression:
        left = self.multiplicative()
        while True:
            kind, val, _ = self.peek()
            if kind == _TOK_OP and val in "+-":
                self.advance()
                right = self.multiplicative()
                left = Bin(val, left, right)
            else:
                return left

    def multiplicative(self) -> Expression:
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == _TOK_OP and val in "*/":
                self.advance()
                right = self.unary()
                left = Bin(val, left, right)
            else:
                return left

    def unary(self) -> Expression:
        kind, val, _ = self.peek()
        if kind == _TOK_OP and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == _TOK_OP and val == "^":
            self.advance()
            # right-associative; exponent may carry a unary minus
            return Bin("^", base, self.unary())
        return base

    def primary(self) -> Expression:
        kind, val, off = self.advance()
        if kind == _TOK_NUM:
            return Num(val)
        if kind == _TOK_NAME:
            k2, v2, _ = self.peek()
            if k2 == _TOK_OP and v2 == "(":
                if val not in _FUNCTIONS:
                    raise ParseError(f"unknown function '{val}'", off)
                self.advance()
                args = [self.additive()]
                while True:
                    k3, v3, _ = self.peek()
                    if k3 == _TOK_OP and v3 == ",":
                        self.advance()
                        args.append(self.additive())
                    else:
                        break
                self.expect_op(")")
                if len(args) != _FUNCTIONS[val]:
                    raise ParseError(
                        f"function '{val}' takes {_FUNCTIONS[val]} argument(s), got {len(args)}", off
                    )
                return Call(val, tuple(args))
            return Var(val)
        if kind == _TOK_OP and val == "(":
            e = self.additive()
            self.expect_op(")")
            return e
        raise ParseError("unexpected token", off, ("literal", "name", "'('", "'-'"))


def parse(text: str) -> Expression:
    """Parse infix text into an expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Serialization (minimal parentheses; parse(serialize(e)) == e)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expression) -> int:
    if isinstance(e, (Num, Var, Call)):
        return _PREC_ATOM
    if isinstance(e, Neg):
        return _PREC_UNARY
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def serialize(e: Expression) -> str:
    """Render the tree back to infix text."""
    def wrap(child: Expression, minimum: int) -> str:
        s = serialize(child)
        return f"({s})" if _prec(child) < minimum else s

    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + wrap(e.arg, _PREC_UNARY)
    if isinstance(e, Call):
        return e.fn + "(" + ", ".join(serialize(a) for a in e.args) + ")"
    if e.op in "+-":
        return wrap(e.left, _PREC_ADD) + e.op + wrap(e.right, _PREC_MUL)
    if e.op in "*/":
        return wrap(e.left, _PREC_MUL) + e.op + wrap(e.right, _PREC_UNARY)
    # '^' right-associative, left operand must be atomic
    return wrap(e.left, _PREC_ATOM) + "^" + wrap(e.right, _PREC_UNARY)


def free_names(e: Expression) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_names(e.arg)
    if isinstance(e, Bin):
        return free_names(e.left) | free_names(e.right)
    out: set[str] = set()
    for a in e.args:
        out |= free_names(a)
    return out


# ---------------------------------------------------------------------------
# Second-order dual numbers.  h is None when only first derivatives are
# tracked; all the update rules keep h symmetric bitwise.
# ---------------------------------------------------------------------------

class _Dual:
    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray | None):
        self.v = v
        self.g = g
        self.h = h

    @staticmethod
    def constant(v: float, nvars: int, order: int) -> "_Dual":
        h = np.zeros((nvars, nvars)) if order >= 2 else None
        return _Dual(float(v), np.zeros(nvars), h)

    @staticmethod
    def seed(v: float, index: int, nvars: int, order: int) -> "_Dual":
        g = np.zeros(nvars)
        g[index] = 1.0
        h = np.zeros((nvars, nvars)) if order >= 2 else None
        return _Dual(float(v), g, h)

    def is_const(self) -> bool:
        return not self.g.any() and (self.h is None or not self.h.any())

    def add(self, o: "_Dual") -> "_Dual":
        h = None if self.h is None else self.h + o.h
        return _Dual(self.v + o.v, self.g + o.g, h)

    def sub(self, o: "_Dual") -> "_Dual":
        h = None if self.h is None else self.h - o.h
        return _Dual(self.v - o.v, self.g - o.g, h)

    def neg(self) -> "_Dual":
        h = None if self.h is None else -self.h
        return _Dual(-self.v, -self.g, h)

    def mul(self, o: "_Dual") -> "_Dual":
        h = None
        if self.h is not None:
            cross = np.outer(self.g, o.g)
            h = self.h * o.v + cross + cross.T + self.v * o.h
        return _Dual(self.v * o.v, self.g * o.v + self.v * o.g, h)

    def recip(self, node: Expression) -> "_Dual":
        if self.v == 0.0:
            raise DomainError("division by zero", node, self.v)
        inv = 1.0 / self.v
        g = -self.g * inv * inv
        h = None
        if self.h is not None:
            outer = np.outer(self.g, self.g)
            h = -self.h * inv * inv + 2.0 * outer * inv ** 3
        return _Dual(inv, g, h)

    def chain(self, f: float, fp: float, fpp: float) -> "_Dual":
        """Apply scalar function with value f and derivatives fp, fpp."""
        h = None
        if self.h is not None:
            h = fp * self.h + fpp * np.outer(self.g, self.g)
        return _Dual(f, fp * self.g, h)


def _dual_pow(base: _Dual, expo: _Dual, node: Expression) -> _Dual:
    if expo.is_const():
        p = expo.v
        if p == round(p):
            p = int(round(p))
            if base.v == 0.0 and p < 0:
                raise DomainError("zero raised to a negative power", node, base.v)
            v = float(base.v ** p)
            if base.v == 0.0:
                fp = 0.0 if p != 1 else 1.0
                fpp = 0.0 if p != 2 else 2.0
            else:
                fp = p * base.v ** (p - 1)
                fpp = p * (p - 1) * base.v ** (p - 2)
            return base.chain(v, fp, fpp)
        if base.v <= 0.0:
            raise DomainError("non-integer power of a non-positive base", node, base.v)
        v = base.v ** p
        fp = p * base.v ** (p - 1.0)
        fpp = p * (p - 1.0) * base.v ** (p - 2.0)
        return base.chain(v, fp, fpp)
    # variable exponent: a^b = exp(b ln a), requires a > 0
    if base.v <= 0.0:
        raise DomainError("variable power of a non-positive base", node, base.v)
    ln_a = base.chain(math.log(base.v), 1.0 / base.v, -1.0 / base.v ** 2)
    prod = expo.mul(ln_a)
    e = math.exp(prod.v)
    return prod.chain(e, e, e)


def _apply_call(fn: str, args: list[_Dual], node: Expression) -> _Dual:
    if fn == "pow":
        return _dual_pow(args[0], args[1], node)
    (a,) = args
    if fn == "exp":
        e = math.exp(a.v)
        return a.chain(e, e, e)
    if fn == "ln":
        if a.v <= 0.0:
            raise DomainError("logarithm of a non-positive value", node, a.v)
        return a.chain(math.log(a.v), 1.0 / a.v, -1.0 / a.v ** 2)
    if fn == "sqrt":
        if a.v < 0.0:
            raise DomainError("square root of a negative value", node, a.v)
        if a.v == 0.0:
            raise DomainError("square root not differentiable at zero", node, a.v)
        r = math.sqrt(a.v)
        return a.chain(r, 0.5 / r, -0.25 / (r * a.v))
    if fn == "abs":
        sign = 1.0 if a.v > 0.0 else (-1.0 if a.v < 0.0 else 0.0)
        return a.chain(abs(a.v), sign, 0.0)
    raise ExprError(f"unknown function '{fn}'")


def _eval_dual(e: Expression, env: dict[str, _Dual], nvars: int, order: int) -> _Dual:
    if isinstance(e, Num):
        return _Dual.constant(e.value, nvars, order)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise BindError(f"unbound coordinate '{e.name}'") from None
    if isinstance(e, Neg):
        return _eval_dual(e.arg, env, nvars, order).neg()
    if isinstance(e, Bin):
        left = _eval_dual(e.left, env, nvars, order)
        right = _eval_dual(e.right, env, nvars, order)
        if e.op == "+":
            return left.add(right)
        if e.op == "-":
            return left.sub(right)
        if e.op == "*":
            return left.mul(right)
        if e.op == "/":
            return left.mul(right.recip(e))
        return _dual_pow(left, right, e)
    args = [_eval_dual(a, env, nvars, order) for a in e.args]
    return _apply_call(e.fn, args, e)


def _run(e: Expression, binding: dict[str, float], wrt: tuple[str, ...], order: int) -> _Dual:
    if len(set(binding)) != len(binding):
        raise BindError("duplicate coordinate names in binding")
    nvars = len(wrt)
    index = {name: i for i, name in enumerate(wrt)}
    env: dict[str, _Dual] = {}
    for name, value in binding.items():
        if name in index:
            env[name] = _Dual.seed(value, index[name], nvars, order)
        else:
            env[name] = _Dual.constant(value, nvars, order)
    return _eval_dual(e, env, nvars, order)


def evaluate(e: Expression, binding: dict[str, float]) -> float:
    """Evaluate at a binding; domain violations raise instead of returning NaN/inf."""
    return _run(e, binding, (), 1).v


def grad(e: Expression, binding: dict[str, float], wrt: list[str] | tuple[str, ...]) -> np.ndarray:
    """Exact first derivatives, ordered as ``wrt``."""
    return _run(e, binding, tuple(wrt), 1).g


def hessian(e: Expression, binding: dict[str, float], wrt: list[str] | tuple[str, ...]) -> np.ndarray:
    """Exact second derivatives; symmetric bitwise by construction."""
    return _run(e, binding, tuple(wrt), 2).h


# ---------------------------------------------------------------------------
# Symbolic derivative trees.  Used to materialize potential-generated 1-form
# coefficients as expressions in their own right (so closeness tests really
# differentiate them again, instead of reading off a Hessian).  Only trivial
# constant folding; no CAS-style simplification.
# ---------------------------------------------------------------------------

def const(v: float) -> Expression:
    return Num(float(v))


def var(name: str) -> Expression:
    return Var(name)


def _is_num(e: Expression, v: float) -> bool:
    return isinstance(e, Num) and e.value == v


def add(a: Expression, b: Expression) -> Expression:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Bin("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Bin("/", a, b)


def neg(a: Expression) -> Expression:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def differentiate(e: Expression, name: str) -> Expression:
    """Partial derivative as a new expression tree."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == name else 0.0)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, name))
    if isinstance(e, Bin):
        da = differentiate(e.left, name)
        db = differentiate(e.right, name)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        if e.op == "/":
            return sub(div(da, e.right), div(mul(e.left, db), mul(e.right, e.right)))
        # power
        return _diff_pow(e.left, e.right, da, db)
    if e.fn == "pow":
        base, expo = e.args
        return _diff_pow(base, expo, differentiate(base, name), differentiate(expo, name))
    (a,) = e.args
    da = differentiate(a, name)
    if e.fn == "exp":
        return mul(Call("exp", (a,)), da)
    if e.fn == "ln":
        return div(da, a)
    if e.fn == "sqrt":
        return div(da, mul(Num(2.0), Call("sqrt", (a,))))
    if e.fn == "abs":
        # d|a| = a/|a| da away from zero
        return mul(div(a, Call("abs", (a,))), da)
    raise ExprError(f"unknown function '{e.fn}'")


def _diff_pow(base: Expression, expo: Expression, da: Expression, db: Expression) -> Expression:
    f = Bin("^", base, expo)
    if _is_num(db, 0.0):
        # p * a^(p-1) * a'
        return mul(mul(expo, Bin("^", base, sub(expo, Num(1.0)))), da)
    # general: f' = f * (b' ln a + b a'/a)
    inner = add(mul(db, Call("ln", (base,))), div(mul(expo, da), base))
    return mul(f, inner)


# ---------------------------------------------------------------------------
# ScalarField: an expression bound to a declared coordinate space.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """Expression over a fixed ordered coordinate list.

    Unresolved coordinate references fail at construction, not at evaluation.
    """

    expression: Expression
    coords: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords):
            raise BindError("coordinate names must be unique")
        unknown = free_names(self.expression) - set(self.coords)
        if unknown:
            raise BindError(f"unresolved coordinate names: {sorted(unknown)}")

    @classmethod
    def from_text(cls, text: str, coords: list[str] | tuple[str, ...]) -> "ScalarField":
        return cls(parse(text), tuple(coords))

    def value(self, binding: dict[str, float]) -> float:
        return evaluate(self.expression, binding)

    def grad(self, binding: dict[str, float], wrt: tuple[str, ...] | None = None) -> np.ndarray:
        return grad(self.expression, binding, wrt if wrt is not None else self.coords)

    def hessian(self, binding: dict[str, float], wrt: tuple[str, ...] | None = None) -> np.ndarray:
        return hessian(self.expression, binding, wrt if wrt is not None else self.coords)

    def partial(self, name: str) -> "ScalarField":
        """Symbolic partial derivative, as a field over the same coordinates."""
        return ScalarField(differentiate(self.expression, name), self.coords)

    def __str__(self) -> str:
        return serialize(self.expression)
