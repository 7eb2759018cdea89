"""A small exact expression engine over the coordinates ``y1..yN, t, r``.

Expressions are immutable trees built through folding constructors
(``add``, ``mul``, ``power``, ``func``).  Only constant folding and
flattening happen; equality of two expressions is decided numerically by
:func:`equal`.

Grammar accepted by :func:`parse` and emitted by :func:`to_str`::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" integer)?
    atom   := number | "i" | name | func "(" expr ")" | "(" expr ")"
    integer:= "-"? digits | "(" "-"? digits ")"
"""
from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

FUNCTIONS: dict[str, tuple[Callable, Callable]] = {
    "exp": (np.exp, cmath.exp),
    "sin": (np.sin, cmath.sin),
    "cos": (np.cos, cmath.cos),
}

_VAR_RE = re.compile(r"y[1-9][0-9]*|t|r")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, src: str, pos: int):
        self.src = src
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {src!r}")


class EvaluationError(ExprError):
    pass


class Expr:
    """Base node.  Arithmetic operators build folded trees."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise ExprError("only integer powers are supported")
        return power(self, int(n))

    def __str__(self):
        return to_str(self)

    def is_zero(self) -> bool:
        return isinstance(self, Const) and self.value == 0

    @property
    def free_vars(self) -> frozenset[str]:
        return free_vars(self)


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: complex

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Add(Expr):
    args: tuple

    def __repr__(self):
        return f"Add{self.args!r}"


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    args: tuple

    def __repr__(self):
        return f"Mul{self.args!r}"


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: int

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"


@dataclass(frozen=True, repr=False)
class Func(Expr):
    name: str
    arg: Expr

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Const(0j)
ONE = Const(1 + 0j)
I = Const(1j)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(complex(x))
    if isinstance(x, str):
        return parse(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def const(x) -> Const:
    return Const(complex(x))


def var(name: str) -> Var:
    if not _VAR_RE.fullmatch(name):
        raise ExprError(f"unknown variable {name!r}")
    return Var(name)


def y(k: int) -> Var:
    return Var(f"y{k}")


T = Var("t")
R = Var("r")


def coordinate_names(n: int) -> list[str]:
    """``[y1, ..., yn, t, r]``."""
    return [f"y{k}" for k in range(1, n + 1)] + ["t", "r"]


# ---------------------------------------------------------------- folding

def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    c = 0j
    for term in terms:
        for a in (term.args if isinstance(term, Add) else (term,)):
            if isinstance(a, Const):
                c += a.value
            else:
                flat.append(a)
    if c != 0 or not flat:
        flat.append(Const(c))
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    c = 1 + 0j
    for f in factors:
        for a in (f.args if isinstance(f, Mul) else (f,)):
            if isinstance(a, Const):
                c *= a.value
            else:
                flat.append(a)
    if c == 0:
        return ZERO
    if c != 1 or not flat:
        flat.insert(0, Const(c))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(Const(-1 + 0j), e)


def power(base: Expr, n: int) -> Expr:
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("zero to a negative power")
        return Const(base.value ** n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    if isinstance(arg, Const):
        return Const(complex(FUNCTIONS[name][1](arg.value)))
    return Func(name, arg)


def exp(e) -> Expr:
    return func("exp", as_expr(e))


def sin(e) -> Expr:
    return func("sin", as_expr(e))


def cos(e) -> Expr:
    return func("cos", as_expr(e))


# ---------------------------------------------------------------- traversal

def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Add, Mul)):
        return frozenset().union(*(free_vars(a) for a in e.args))
    if isinstance(e, Pow):
        return free_vars(e.base)
    if isinstance(e, Func):
        return free_vars(e.arg)
    return frozenset()


def max_space_index(e: Expr) -> int:
    """Largest ``k`` among the ``yk`` appearing in ``e`` (0 if none)."""
    ks = [int(v[1:]) for v in free_vars(e) if v.startswith("y")]
    return max(ks, default=0)


def diff(e: Expr, v: str | Var) -> Expr:
    name = v.name if isinstance(v, Var) else v
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if name not in free_vars(e):
        return ZERO
    if isinstance(e, Add):
        return add(*(diff(a, name) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for k, a in enumerate(e.args):
            da = diff(a, name)
            if not da.is_zero():
                terms.append(mul(*e.args[:k], da, *e.args[k + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        return mul(Const(complex(e.exp)), power(e.base, e.exp - 1), diff(e.base, name))
    if isinstance(e, Func):
        da = diff(e.arg, name)
        if e.name == "exp":
            outer = e
        elif e.name == "sin":
            outer = func("cos", e.arg)
        else:
            outer = neg(func("sin", e.arg))
        return mul(outer, da)
    raise TypeError(type(e))


def subs(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneous substitution of variables."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(*(subs(a, mapping) for a in e.args))
    if isinstance(e, Mul):
        return mul(*(subs(a, mapping) for a in e.args))
    if isinstance(e, Pow):
        return power(subs(e.base, mapping), e.exp)
    if isinstance(e, Func):
        return func(e.name, subs(e.arg, mapping))
    raise TypeError(type(e))


def evaluate(e: Expr, env: Mapping[str, object]):
    """Evaluate with numpy broadcasting; ``env`` maps variable names to values."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"no value bound for {e.name!r}") from None
    if isinstance(e, Add):
        out = evaluate(e.args[0], env)
        for a in e.args[1:]:
            out = out + evaluate(a, env)
        return out
    if isinstance(e, Mul):
        out = evaluate(e.args[0], env)
        for a in e.args[1:]:
            out = out * evaluate(a, env)
        return out
    if isinstance(e, Pow):
        b = evaluate(e.base, env)
        if e.exp < 0:
            return 1.0 / _ipow(b, -e.exp)
        return _ipow(b, e.exp)
    if isinstance(e, Func):
        return FUNCTIONS[e.name][0](evaluate(e.arg, env))
    raise TypeError(type(e))


def _ipow(b, n: int):
    out = b
    for _ in range(n - 1):
        out = out * b
    return out


def degree(e: Expr) -> int | None:
    """Total polynomial degree, or ``None`` if ``e`` is not a polynomial."""
    if isinstance(e, Const):
        return 0 if e.value != 0 else -1
    if isinstance(e, Var):
        return 1
    if isinstance(e, Add):
        ds = [degree(a) for a in e.args]
        return None if None in ds else max(ds)
    if isinstance(e, Mul):
        ds = [degree(a) for a in e.args]
        return None if None in ds else sum(d for d in ds if d > 0)
    if isinstance(e, Pow):
        d = degree(e.base)
        if d is None or e.exp < 0:
            return None
        return d * e.exp
    return None


# ---------------------------------------------------------------- equality

def equal(a, b, tol: float = 1e-9, samples: int = 20, seed: int = 0,
          imag_scale: float = 0.1, retries: int = 8) -> bool:
    """Randomized-evaluation equality of two expressions.

    Both sides are evaluated at ``samples`` points whose coordinates are
    uniform in [-2, 2] with a small random imaginary part.  Point sets that
    hit a singularity are redrawn.
    """
    return deviation(a, b, samples=samples, seed=seed, imag_scale=imag_scale,
                     retries=retries) <= tol


def deviation(a, b, samples: int = 20, seed: int = 0, imag_scale: float = 0.1,
              retries: int = 8) -> float:
    """``max|a - b| / (1 + max(|a|, |b|))`` over random sample points."""
    a, b = as_expr(a), as_expr(b)
    names = sorted(free_vars(a) | free_vars(b))
    rng = np.random.default_rng(seed)
    samples = max(int(samples), 20)
    for _ in range(retries):
        env = {
            name: rng.uniform(-2, 2, samples) + 1j * imag_scale * rng.uniform(-1, 1, samples)
            for name in names
        }
        with np.errstate(all="ignore"):
            va = np.broadcast_to(evaluate(a, env), (samples,))
            vb = np.broadcast_to(evaluate(b, env), (samples,))
        if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
            continue
        scale = max(np.max(np.abs(va)), np.max(np.abs(vb)))
        if scale > 1e12:
            continue
        return float(np.max(np.abs(va - vb)) / (1.0 + scale))
    raise EvaluationError("expression singular at every sampled point set")


def is_homogeneous(e, consts) -> bool:
    """True iff ``d e / d r == (i m / hbar) e``."""
    e = as_expr(e)
    return equal(diff(e, "r"), mul(Const(1j * consts.m / consts.hbar), e))


# ---------------------------------------------------------------- printing

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 4, 5


def _fmt_real(x: float) -> str:
    if x == 0:
        return "0"
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _fmt_const(c: complex) -> tuple[str, int]:
    """Text of a constant and its precedence."""
    re_, im_ = c.real, c.imag
    if im_ == 0:
        s = _fmt_real(re_)
        return s, (_PREC_ATOM if re_ >= 0 else _PREC_ADD)
    if im_ == 1:
        imag = "i"
    elif im_ == -1:
        imag = "-i"
    else:
        imag = _fmt_real(im_) + "*i"
    if re_ == 0:
        return imag, (_PREC_ATOM if imag == "i" else (_PREC_MUL if im_ > 0 else _PREC_ADD))
    sign = " - " if im_ < 0 else " + "
    return _fmt_real(re_) + sign + imag.lstrip("-"), _PREC_ADD


def _is_negative_term(e: Expr) -> bool:
    c = e.value if isinstance(e, Const) else (
        e.args[0].value if isinstance(e, Mul) and isinstance(e.args[0], Const) else None)
    if c is None:
        return False
    return (c.imag == 0 and c.real < 0) or (c.real == 0 and c.imag < 0)


def _paren(e: Expr, min_prec: int) -> str:
    s, p = _render(e)
    return f"({s})" if p < min_prec else s


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Func):
        return f"{e.name}({_render(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Pow):
        if e.exp < 0:
            return "1/" + _paren(power(e.base, -e.exp), _PREC_POW), _PREC_MUL
        return f"{_paren(e.base, _PREC_ATOM)}^{e.exp}", _PREC_POW
    if isinstance(e, Add):
        parts = []
        for k, a in enumerate(e.args):
            if k == 0:
                parts.append(_paren(a, _PREC_ADD + 1) if _is_complex_const(a) and len(e.args) > 1
                             else _render(a)[0])
            elif _is_negative_term(a):
                parts.append(" - " + _paren(neg(a), _PREC_ADD + 1))
            else:
                parts.append(" + " + _paren(a, _PREC_ADD + 1))
        return "".join(parts), _PREC_ADD
    if isinstance(e, Mul):
        return _render_mul(e)
    raise TypeError(type(e))


def _is_complex_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value.real != 0 and e.value.imag != 0


def _render_mul(e: Mul) -> tuple[str, int]:
    args = list(e.args)
    lead = ""
    if isinstance(args[0], Const):
        c = args.pop(0).value
        if c == -1:
            lead = "-"
        elif c.imag == 0 or c.real == 0:
            lead = _fmt_const(c)[0] + "*"
        else:
            lead = "(" + _fmt_const(c)[0] + ")*"
    num = [a for a in args if not (isinstance(a, Pow) and a.exp < 0)]
    den = [power(a.base, -a.exp) for a in args if isinstance(a, Pow) and a.exp < 0]
    num_s = "*".join(_paren(a, _PREC_MUL + 1) for a in num)
    if not num_s:
        num_s = lead[:-1] if lead.endswith("*") else lead + "1"
        lead = ""
    s = lead + num_s
    if den:
        den_s = (_paren(den[0], _PREC_POW) if len(den) == 1
                 else "(" + "*".join(_paren(a, _PREC_MUL + 1) for a in den) + ")")
        s += "/" + den_s
    return s, (_PREC_ADD if s.startswith("-") else _PREC_MUL)


def to_str(e: Expr) -> str:
    return _render(e)[0]


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", src, pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, n: int | None):
        self.src = src
        self.n = n
        self.toks = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text or kind == "end":
            raise ParseError(f"expected {text!r}, found {val or 'end of input'!r}", self.src, pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", self.src, pos)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            f = self.unary()
            if op == "/":
                pos = self.toks[self.k - 1][2]
                try:
                    f = power(f, -1)
                except ZeroDivisionError:
                    raise ParseError("division by zero", self.src, pos) from None
            factors.append(f)
        return mul(*factors)

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            e = self.unary()
            return neg(e) if val == "-" else e
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            n = self.integer()
            try:
                return power(base, n)
            except ZeroDivisionError:
                raise ParseError("zero to a negative power", self.src, self.peek()[2]) from None
        return base

    def integer(self) -> int:
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        sign = 1
        if self.peek()[1] in ("-", "+") and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ParseError("exponent must be an integer literal", self.src, pos)
        if paren:
            self.expect(")")
        return sign * int(val)

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(complex(float(val)))
        if kind == "name":
            if val == "i":
                return I
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return func(val, arg)
            if _VAR_RE.fullmatch(val):
                if self.n is not None and val.startswith("y") and int(val[1:]) > self.n:
                    raise ParseError(f"unknown identifier {val!r} (dimension {self.n})",
                                     self.src, pos)
                return Var(val)
            raise ParseError(f"unknown identifier {val!r}", self.src, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {'end of input' if kind == 'end' else repr(val)}",
                         self.src, pos)


def parse(src: str, n: int | None = None) -> Expr:
    """Parse ``src``; with ``n`` given, ``yk`` for ``k > n`` is rejected."""
    return _Parser(src, n).parse()


def check_vars(e: Expr, allowed: Iterable[str], what: str = "expression") -> None:
    extra = free_vars(e) - set(allowed)
    if extra:
        raise ExprError(f"{what} may not depend on {sorted(extra)}")
