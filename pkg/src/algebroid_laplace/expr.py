"""Symbolic complex expressions in the coordinates (z, u) and their conjugates.

Expressions are hash-consed: building the same tree twice returns the same
object, so identity comparison is structural comparison and every cache in
this module can key on the node itself.  Conjugation is normalized away at
construction time by pushing it down to the leaves, where it flips the
``barred`` flag of variables and conjugates literals.

Differentiation is Wirtinger-style: a variable and its conjugate are
independent symbols.
"""
from __future__ import annotations

import cmath
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# nested delta-derivatives of inverse-metric entries produce deep trees
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

__all__ = [
    "Expr", "Var", "EvalPoint", "EvaluationError", "Evaluator",
    "const", "var", "zvar", "uvar", "add", "sub", "mul", "div", "neg",
    "power", "exp", "log", "conj", "total", "product",
    "diff", "evaluate", "fd_deriv", "is_holomorphic", "to_text",
    "ZERO", "ONE", "I",
]


class EvaluationError(ArithmeticError):
    """Raised on division by zero or log of zero during evaluation."""


@dataclass(frozen=True)
class Var:
    """A coordinate symbol: ``kind`` is ``"z"`` (base) or ``"u"`` (fiber).

    ``index`` is 0-based.
    """

    kind: str
    index: int
    barred: bool = False

    def conjugate(self) -> "Var":
        return Var(self.kind, self.index, not self.barred)

    def __str__(self) -> str:
        name = f"{self.kind}{self.index + 1}"
        return f"conj({name})" if self.barred else name


class Expr:
    """Immutable, interned expression node.

    Never instantiate directly; use the builder functions (``add``, ``mul``,
    ...) or arithmetic operators, which simplify and intern.
    """

    __slots__ = ("op", "args", "value", "free", "size", "_conj")

    op: str
    args: tuple["Expr", ...]

    def __init__(self, op, args, value, free):
        self.op = op
        self.args = args
        self.value = value
        self.free = free
        self.size = 1 + sum(a.size for a in args)
        self._conj = None

    # Structural equality is identity because nodes are interned.
    __hash__ = object.__hash__

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def is_zero(self) -> bool:
        return self.op == "const" and self.value == 0

    # arithmetic sugar
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return power(self, k)


_TABLE: dict[tuple, Expr] = {}
_EMPTY: frozenset = frozenset()


def _intern(op: str, args: tuple, value=None) -> Expr:
    key = (op, value, tuple(id(a) for a in args))
    node = _TABLE.get(key)
    if node is None:
        if op in ("z", "u"):
            free = frozenset((value,))
        elif args:
            free = args[0].free.union(*(a.free for a in args[1:])) if len(args) > 1 else args[0].free
        else:
            free = _EMPTY
        node = Expr(op, args, value, free)
        _TABLE[key] = node
    return node


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def const(c) -> Expr:
    c = complex(c)
    if c == 0:
        c = 0j  # fold -0.0 variants onto a single node
    return _intern("const", (), c)


ZERO = const(0)
ONE = const(1)
I = const(1j)


def var(v: Var) -> Expr:
    return _intern(v.kind, (), v)


def zvar(k: int, barred: bool = False) -> Expr:
    return var(Var("z", k, barred))


def uvar(a: int, barred: bool = False) -> Expr:
    return var(Var("u", a, barred))


def neg(a: Expr) -> Expr:
    if a.op == "const":
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    if a.op == "sub":
        return sub(a.args[1], a.args[0])
    return _intern("neg", (a,))


def add(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value + b.value)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if b.op == "neg":
        return sub(a, b.args[0])
    if a.op == "neg":
        return sub(b, a.args[0])
    return _intern("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a is b:
        return ZERO
    if a.op == "const" and b.op == "const":
        return const(a.value - b.value)
    if b.is_zero():
        return a
    if a.is_zero():
        return neg(b)
    if b.op == "neg":
        return add(a, b.args[0])
    return _intern("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value * b.value)
    if b.op == "const":
        a, b = b, a
    if a.op == "const":
        c = a.value
        if c == 0:
            return ZERO
        if c == 1:
            return b
        if c == -1:
            return neg(b)
        if b.op == "mul" and b.args[0].op == "const":
            return mul(const(c * b.args[0].value), b.args[1])
        if b.op == "neg":
            return mul(const(-c), b.args[0])
    if a.op == "neg" and b.op == "neg":
        return mul(a.args[0], b.args[0])
    if a.op == "neg":
        return neg(mul(a.args[0], b))
    if b.op == "neg":
        return neg(mul(a, b.args[0]))
    return _intern("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b.op == "const":
        if b.value == 0:
            # kept symbolic; evaluation reports the division by zero
            return _intern("div", (a, b))
        return mul(const(1 / b.value), a)
    if a.is_zero():
        return ZERO
    if a.op == "neg":
        return neg(div(a.args[0], b))
    return _intern("div", (a, b))


def power(a: Expr, k: int) -> Expr:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise TypeError("exponent must be an integer")
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if a.op == "const" and (a.value != 0 or k > 0):
        return const(a.value ** k)
    if a.op == "pow":
        return power(a.args[0], a.value * k)
    return _intern("pow", (a,), k)


def exp(a: Expr) -> Expr:
    if a.op == "const":
        return const(cmath.exp(a.value))
    return _intern("exp", (a,))


def log(a: Expr) -> Expr:
    if a.op == "const" and a.value != 0:
        return const(cmath.log(a.value))
    return _intern("log", (a,))


def total(terms: Iterable[Expr]) -> Expr:
    """Sum of ``terms`` as a balanced tree (keeps recursion depth logarithmic)."""
    items = [t for t in terms if not t.is_zero()]
    if not items:
        return ZERO
    while len(items) > 1:
        paired = [add(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


def product(factors: Iterable[Expr]) -> Expr:
    out = ONE
    for f in factors:
        out = mul(out, f)
    return out


_BUILDERS = {
    "add": lambda a, v: add(*a),
    "sub": lambda a, v: sub(*a),
    "mul": lambda a, v: mul(*a),
    "div": lambda a, v: div(*a),
    "neg": lambda a, v: neg(*a),
    "pow": lambda a, v: power(a[0], v),
    "exp": lambda a, v: exp(*a),
    "log": lambda a, v: log(*a),
}


def conj(e: Expr) -> Expr:
    """Complex conjugate, pushed down to the leaves.

    ``log`` commutes with conjugation off the negative real axis (principal
    branch); arguments on the cut are the caller's responsibility.
    """
    if e._conj is not None:
        return e._conj
    if e.op == "const":
        out = const(e.value.conjugate())
    elif e.op in ("z", "u"):
        out = var(e.value.conjugate())
    else:
        out = _BUILDERS[e.op](tuple(conj(a) for a in e.args), e.value)
    e._conj = out
    out._conj = e
    return out


# ---------------------------------------------------------------- derivatives

_DIFF_CACHE: dict[tuple[Expr, Var], Expr] = {}


def diff(e: Expr, v: Var) -> Expr:
    """Exact Wirtinger derivative of ``e`` with respect to the symbol ``v``."""
    if v not in e.free:
        return ZERO
    key = (e, v)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    op, args = e.op, e.args
    if op in ("z", "u"):
        out = ONE  # v in e.free implies e is v
    elif op == "add":
        out = add(diff(args[0], v), diff(args[1], v))
    elif op == "sub":
        out = sub(diff(args[0], v), diff(args[1], v))
    elif op == "neg":
        out = neg(diff(args[0], v))
    elif op == "mul":
        a, b = args
        out = add(mul(diff(a, v), b), mul(a, diff(b, v)))
    elif op == "div":
        a, b = args
        # (a/b)' = (a' - (a/b) b') / b, reusing this node
        out = div(sub(diff(a, v), mul(e, diff(b, v))), b)
    elif op == "pow":
        a = args[0]
        out = mul(mul(const(e.value), power(a, e.value - 1)), diff(a, v))
    elif op == "exp":
        out = mul(e, diff(args[0], v))
    elif op == "log":
        out = div(diff(args[0], v), args[0])
    else:  # pragma: no cover
        raise ValueError(f"unknown node {op}")
    _DIFF_CACHE[key] = out
    return out


def is_holomorphic(e: Expr) -> bool:
    """True iff ``e`` depends on no barred symbol after normalization."""
    barred = [v for v in e.free if v.barred]
    return not barred and all(diff(e, v.conjugate()).is_zero() for v in barred)


# ----------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class EvalPoint:
    """Values of z and u.  Conjugate coordinates are always derived.

    Entries may be scalars or equally shaped numpy arrays (a batch of points).
    """

    z: tuple
    u: tuple

    def value(self, v: Var):
        x = (self.z if v.kind == "z" else self.u)[v.index]
        return np.conj(x) if v.barred else x

    def replace(self, v: Var, x) -> "EvalPoint":
        """Point with coordinate ``v`` (ignoring ``barred``) set to ``x``."""
        coords = list(self.z if v.kind == "z" else self.u)
        coords[v.index] = x
        if v.kind == "z":
            return EvalPoint(tuple(coords), self.u)
        return EvalPoint(self.z, tuple(coords))

    @classmethod
    def of(cls, z: Sequence = (), u: Sequence = ()) -> "EvalPoint":
        def conv(x):
            return np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
        return cls(tuple(conv(x) for x in z), tuple(conv(x) for x in u))


def _nonzero(x, what):
    if np.any(x == 0):
        raise EvaluationError(what)


class Evaluator:
    """Evaluates many expressions at one point, sharing common subtrees."""

    def __init__(self, point: EvalPoint):
        self.point = point
        self._cache: dict[Expr, object] = {}

    def __call__(self, e: Expr):
        cache = self._cache
        if e in cache:
            return cache[e]
        stack = [(e, False)]
        with np.errstate(all="ignore"):
            while stack:
                node, ready = stack.pop()
                if node in cache:
                    continue
                if not ready:
                    stack.append((node, True))
                    stack.extend((a, False) for a in node.args if a not in cache)
                    continue
                cache[node] = self._apply(node, [cache[a] for a in node.args])
        return cache[e]

    def full(self, e: Expr) -> np.ndarray:
        """Like calling the evaluator, but broadcast to the point's batch shape."""
        return np.broadcast_to(np.asarray(self(e), dtype=complex), _shape(self.point))

    def _apply(self, node: Expr, vals):
        op = node.op
        if op == "const":
            return node.value
        if op in ("z", "u"):
            return self.point.value(node.value)
        if op == "add":
            return vals[0] + vals[1]
        if op == "sub":
            return vals[0] - vals[1]
        if op == "mul":
            return vals[0] * vals[1]
        if op == "neg":
            return -vals[0]
        if op == "div":
            _nonzero(vals[1], "division by zero")
            return vals[0] / vals[1]
        if op == "pow":
            k = node.value
            if k < 0:
                _nonzero(vals[0], "division by zero (negative power of zero)")
                return 1 / vals[0] ** (-k)
            return vals[0] ** k
        if op == "exp":
            return np.exp(vals[0])
        if op == "log":
            _nonzero(vals[0], "log of zero")
            return np.log(vals[0]) if np.ndim(vals[0]) else cmath.log(vals[0])
        raise ValueError(f"unknown node {op}")  # pragma: no cover


def evaluate(e: Expr, point: EvalPoint):
    """Evaluate ``e`` at ``point`` (scalar or batched)."""
    out = Evaluator(point)(e)
    return complex(out) if np.ndim(out) == 0 else np.broadcast_to(out, _shape(point)).astype(complex)


def _shape(point: EvalPoint):
    shapes = [np.shape(x) for x in (*point.z, *point.u)]
    return np.broadcast_shapes(*shapes) if shapes else ()


def fd_deriv(e: Expr, v: Var, point: EvalPoint, step: float = 1e-5):
    """Central-difference Wirtinger derivative; the testing oracle for ``diff``.

    For an unbarred symbol returns (d/dx - i d/dy)/2, for a barred one
    (d/dx + i d/dy)/2, where x + iy is the underlying coordinate.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x0 = point.value(Var(v.kind, v.index))

    def at(shift):
        return evaluate(e, point.replace(v, x0 + shift))

    dx = (at(step) - at(-step)) / (2 * step)
    dy = (at(1j * step) - at(-1j * step)) / (2 * step)
    sign = 1 if v.barred else -1
    return 0.5 * (dx + sign * 1j * dy)


# ------------------------------------------------------------------- printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _const_text(c: complex) -> str:
    re_, im_ = c.real, c.imag
    if im_ == 0:
        return str(int(re_)) if re_ == int(re_) and abs(re_) < 1e15 else repr(float(re_))
    if re_ == 0:
        return f"{_real_text(im_)}*i"
    return f"({_real_text(re_)}+{_real_text(im_)}*i)"


def _real_text(x: float) -> str:
    s = str(int(x)) if x == int(x) and abs(x) < 1e15 else repr(float(x))
    return f"({s})" if x < 0 else s


def to_text(e: Expr) -> str:
    """Render ``e`` in the input grammar (the output re-parses to ``e``'s value)."""
    memo: dict[Expr, tuple[str, int]] = {}

    def wrap(child: Expr, need: int, strict: bool = False) -> str:
        s, p = go(child)
        return f"({s})" if p < need or (strict and p == need) else s

    def go(node: Expr) -> tuple[str, int]:
        if node in memo:
            return memo[node]
        op = node.op
        if op == "const":
            s = _const_text(node.value)
            if s.startswith("-"):
                out = (s, 3)
            elif s.endswith("*i"):
                out = (s, 2)
            else:
                out = (s, 5)
        elif op in ("z", "u"):
            out = (str(node.value), 5)
        elif op in ("add", "sub"):
            sym = "+" if op == "add" else "-"
            out = (f"{wrap(node.args[0], 1)} {sym} {wrap(node.args[1], 1, op == 'sub')}", 1)
        elif op in ("mul", "div"):
            sym = "*" if op == "mul" else "/"
            out = (f"{wrap(node.args[0], 2)}{sym}{wrap(node.args[1], 2, op == 'div')}", 2)
        elif op == "neg":
            out = (f"-{wrap(node.args[0], 3)}", 3)
        elif op == "pow":
            out = (f"{wrap(node.args[0], 5)}^{node.value}", 4)
        else:
            out = (f"{op}({go(node.args[0])[0]})", 5)
        memo[node] = out
        return out

    return go(e)[0]
