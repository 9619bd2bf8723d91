"""Dense truncated multivariate jets for forward-mode differentiation.

A :class:`Jet` stores the raw partial derivatives (not Taylor coefficients) of
a smooth function of ``num_vars`` variables at a point, up to total degree
``order``, and propagates them exactly through arithmetic and the primitive
set {+, -, *, /, sqrt, exp, log, pow, sin, cos, sinh, cosh}.  Coefficients are
kept in a single float64 array whose last axis runs over multi-indices in
graded lexicographic order; any leading axes are broadcast batch axes, so one
jet can carry many evaluation points at once.

Internally a jet space may also carry per-group degree caps (a "box"
truncation: position variables up to one order, fiber variables up to
another).  The public :func:`jet_eval` always uses the full total-degree
simplex.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OrderError

__all__ = [
    "MultiIndex",
    "JetSpace",
    "Jet",
    "jet_space",
    "jet_eval",
    "jet_extract",
    "derivative_jet",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "sinh",
    "cosh",
]

# Batches at least this large route jet multiplication through the compiled
# kernel (when numba is importable); smaller ones stay on numpy to avoid
# compile latency in scalar-heavy paths.
_KERNEL_MIN_WORK = 1 << 16

_mul_kernel = None
_kernel_checked = False


def _load_kernel():
    global _mul_kernel, _kernel_checked
    if _kernel_checked:
        return _mul_kernel
    _kernel_checked = True
    try:
        from numba import njit

        @njit(cache=True)
        def kernel(a, b, I, J, W, starts, out):  # pragma: no cover - compiled
            for bi in range(a.shape[0]):
                for k in range(out.shape[1]):
                    acc = 0.0
                    for p in range(starts[k], starts[k + 1]):
                        # same association as the numpy route: (a*b)*W
                        acc += (a[bi, I[p]] * b[bi, J[p]]) * W[p]
                    out[bi, k] = acc

        # trigger compilation on a trivial call so later timing is flat
        kernel(
            np.zeros((1, 1)), np.zeros((1, 1)),
            np.zeros(1, np.int64), np.zeros(1, np.int64), np.ones(1),
            np.array([0, 1], np.int64), np.zeros((1, 1)),
        )
        _mul_kernel = kernel
    except Exception:
        _mul_kernel = None
    return _mul_kernel


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of one partial derivative, one entry per variable."""

    powers: tuple[int, ...]

    def __post_init__(self):
        if not all(isinstance(p, int) and p >= 0 for p in self.powers):
            raise ValueError(f"multi-index entries must be non-negative ints, got {self.powers}")

    @property
    def degree(self) -> int:
        return sum(self.powers)

    def __len__(self) -> int:
        return len(self.powers)

    def __iter__(self):
        return iter(self.powers)


def _enumerate_indices(num_vars: int, order: int,
                       groups: tuple[int, ...] | None,
                       caps: tuple[int, ...] | None) -> list[tuple[int, ...]]:
    out = []
    for alpha in itertools.product(range(order + 1), repeat=num_vars):
        if sum(alpha) > order:
            continue
        if groups is not None:
            ok = True
            start = 0
            for size, cap in zip(groups, caps):
                if sum(alpha[start:start + size]) > cap:
                    ok = False
                    break
                start += size
            if not ok:
                continue
        out.append(alpha)
    out.sort(key=lambda a: (sum(a), a))
    return out


class JetSpace:
    """Index bookkeeping and cached operation tables for one truncation."""

    __slots__ = ("num_vars", "order", "groups", "caps", "indices", "index_of",
                 "_mul_table", "_shift_tables")

    def __init__(self, num_vars: int, order: int,
                 groups: tuple[int, ...] | None = None,
                 caps: tuple[int, ...] | None = None):
        if num_vars < 1:
            raise ValueError("need at least one variable")
        if order < 0:
            raise ValueError("order must be non-negative")
        if (groups is None) != (caps is None):
            raise ValueError("groups and caps must be given together")
        if groups is not None:
            if sum(groups) != num_vars:
                raise ValueError("group sizes must sum to num_vars")
            if len(groups) != len(caps):
                raise ValueError("one cap per group required")
            order = min(order, sum(caps))
        self.num_vars = num_vars
        self.order = order
        self.groups = groups
        self.caps = caps
        self.indices = _enumerate_indices(num_vars, order, groups, caps)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self._mul_table = None
        self._shift_tables = {}

    @property
    def size(self) -> int:
        return len(self.indices)

    def mul_table(self):
        if self._mul_table is None:
            pairs = []
            for k, alpha in enumerate(self.indices):
                for ib, beta in enumerate(self.indices):
                    if any(b > a for b, a in zip(beta, alpha)):
                        continue
                    gamma = tuple(a - b for a, b in zip(alpha, beta))
                    ig = self.index_of.get(gamma)
                    if ig is None:
                        continue
                    w = 1.0
                    for a, b in zip(alpha, beta):
                        w *= math.comb(a, b)
                    pairs.append((k, ib, ig, w))
            pairs.sort()
            K = np.array([p[0] for p in pairs], dtype=np.int64)
            I = np.array([p[1] for p in pairs], dtype=np.int64)
            J = np.array([p[2] for p in pairs], dtype=np.int64)
            W = np.array([p[3] for p in pairs], dtype=np.float64)
            starts = np.searchsorted(K, np.arange(self.size + 1))
            self._mul_table = (I, J, W, starts)
        return self._mul_table

    def shift_table(self, mu: tuple[int, ...], target: "JetSpace") -> np.ndarray:
        """Gather indices mapping coefficients of D^mu f into ``target``.

        ``target.indices[i]`` is read from ``self.indices`` at the returned
        position ``i``; every nu in the target must satisfy nu + mu in self.
        """
        key = (mu, id(target))
        tbl = self._shift_tables.get(key)
        if tbl is None:
            out = np.empty(target.size, dtype=np.int64)
            for i, nu in enumerate(target.indices):
                s = tuple(n + m for n, m in zip(nu, mu))
                j = self.index_of.get(s)
                if j is None:
                    raise OrderError(
                        f"derivative {mu} of target index {nu} exceeds source truncation")
                out[i] = j
            self._shift_tables[key] = tbl = out
        return tbl

    def __repr__(self):
        extra = f", caps={self.caps}" if self.caps is not None else ""
        return f"JetSpace(num_vars={self.num_vars}, order={self.order}{extra})"


@lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int,
              groups: tuple[int, ...] | None = None,
              caps: tuple[int, ...] | None = None) -> JetSpace:
    """Interned jet-space factory; equal arguments share tables."""
    return JetSpace(num_vars, order, groups, caps)


def _mul_coeffs(space: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    I, J, W, starts = space.mul_table()
    a, b = np.broadcast_arrays(a, b)
    lead = a.shape[:-1]
    nlead = int(np.prod(lead)) if lead else 1
    kernel = _load_kernel() if nlead * len(I) >= _KERNEL_MIN_WORK else None
    if kernel is not None:
        a2 = np.ascontiguousarray(a.reshape(nlead, space.size))
        b2 = np.ascontiguousarray(b.reshape(nlead, space.size))
        out = np.empty((nlead, space.size))
        kernel(a2, b2, I, J, W, starts, out)
        return out.reshape(*lead, space.size)
    prod = a[..., I] * b[..., J]
    prod *= W
    return np.add.reduceat(prod, starts[:-1], axis=-1)


class Jet:
    """Raw-derivative jet; immutable by convention (operations copy)."""

    __slots__ = ("space", "c")
    __array_ufunc__ = None  # keep ndarray ops from consuming jets elementwise

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = np.asarray(coeffs, dtype=np.float64)

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, space: JetSpace, value) -> "Jet":
        value = np.asarray(value, dtype=np.float64)
        c = np.zeros(value.shape + (space.size,))
        c[..., 0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space: JetSpace, i: int, value) -> "Jet":
        if not 0 <= i < space.num_vars:
            raise IndexError(f"variable index {i} out of range for {space.num_vars} variables")
        unit = tuple(1 if j == i else 0 for j in range(space.num_vars))
        pos = space.index_of.get(unit)
        if pos is None:
            raise OrderError(f"variable {i} is capped to degree 0 in this space")
        value = np.asarray(value, dtype=np.float64)
        c = np.zeros(value.shape + (space.size,))
        c[..., 0] = value
        c[..., pos] = 1.0
        return cls(space, c)

    @classmethod
    def variables(cls, space: JetSpace, values: Sequence) -> list["Jet"]:
        if len(values) != space.num_vars:
            raise OrderError(f"expected {space.num_vars} seed values, got {len(values)}")
        return [cls.variable(space, i, v) for i, v in enumerate(values)]

    # -- views -------------------------------------------------------------

    @property
    def value(self):
        return self.c[..., 0]

    @property
    def num_vars(self) -> int:
        return self.space.num_vars

    @property
    def order(self) -> int:
        return self.space.order

    def extract(self, alpha) -> np.ndarray:
        """Raw partial derivative for multi-index ``alpha``."""
        if isinstance(alpha, MultiIndex):
            alpha = alpha.powers
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.space.num_vars:
            raise IndexError(
                f"multi-index arity {len(alpha)} does not match {self.space.num_vars} variables")
        if any(a < 0 for a in alpha):
            raise IndexError(f"negative entry in multi-index {alpha}")
        pos = self.space.index_of.get(alpha)
        if pos is None:
            raise IndexError(f"multi-index {alpha} exceeds truncation of {self.space}")
        return self.c[..., pos]

    # -- helpers -----------------------------------------------------------

    def _check_space(self, other: "Jet"):
        if other.space is not self.space:
            raise OrderError(f"jet spaces differ: {self.space} vs {other.space}")

    def _lift(self, value) -> np.ndarray:
        """Coefficients of a constant broadcast against self."""
        value = np.asarray(value, dtype=np.float64)
        c = np.zeros(value.shape + (self.space.size,))
        c[..., 0] = value
        return c

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            return Jet(self.space, self.c + other.c)
        return Jet(self.space, self.c + self._lift(other))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else np.negative(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            return Jet(self.space, _mul_coeffs(self.space, self.c, other.c))
        other = np.asarray(other, dtype=np.float64)
        return Jet(self.space, self.c * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check_space(other)
            return self * other._reciprocal()
        other = np.asarray(other, dtype=np.float64)
        return Jet(self.space, self.c / other[..., None])

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p == int(p) and p >= 0):
            k = int(p)
            if k < 0:
                return (self ** (-k))._reciprocal()
            out = Jet.constant(self.space, np.ones(self.c.shape[:-1]))
            base = self
            while k:
                if k & 1:
                    out = out * base
                base = base * base if k > 1 else base
                k >>= 1
            return out
        return self._power_series(float(p))

    # -- univariate series lifting ----------------------------------------

    def _horner(self, taylor: list[np.ndarray]) -> "Jet":
        """Evaluate sum taylor[k] * delta^k where delta = self minus value."""
        delta_c = self.c.copy()
        delta_c[..., 0] = 0.0
        delta = Jet(self.space, delta_c)
        order = self.space.order
        res = Jet.constant(self.space, taylor[order])
        for k in range(order - 1, -1, -1):
            res = res * delta + taylor[k]
        return res

    def _series(self, raw_derivs: Callable[[np.ndarray, int], list]) -> "Jet":
        u0 = self.value
        d = raw_derivs(u0, self.space.order)
        taylor = [dk / math.factorial(k) for k, dk in enumerate(d)]
        return self._horner(taylor)

    def _reciprocal(self) -> "Jet":
        if np.any(self.value == 0.0):
            raise DomainError("division by a jet with zero value")
        return self._power_series(-1.0, domain_check=False)

    def _power_series(self, p: float, domain_check: bool = True) -> "Jet":
        if domain_check and np.any(self.value <= 0.0):
            raise DomainError(f"non-integer power {p} of a jet with non-positive value")

        def derivs(u0, order):
            out = [np.power(u0, p)]
            fac = 1.0
            for k in range(1, order + 1):
                fac *= p - (k - 1)
                out.append(fac * np.power(u0, p - k))
            return out

        return self._series(derivs)

    def sqrt(self) -> "Jet":
        if np.any(self.value <= 0.0):
            raise DomainError("sqrt of a jet with non-positive value")
        return self._power_series(0.5, domain_check=False)

    def exp(self) -> "Jet":
        def derivs(u0, order):
            e = np.exp(u0)
            return [e] * (order + 1)

        return self._series(derivs)

    def log(self) -> "Jet":
        if np.any(self.value <= 0.0):
            raise DomainError("log of a jet with non-positive value")

        def derivs(u0, order):
            out = [np.log(u0)]
            for k in range(1, order + 1):
                out.append(((-1.0) ** (k - 1)) * math.factorial(k - 1) / np.power(u0, k))
            return out

        return self._series(derivs)

    def sin(self) -> "Jet":
        def derivs(u0, order):
            table = [np.sin(u0), np.cos(u0), -np.sin(u0), -np.cos(u0)]
            return [table[k % 4] for k in range(order + 1)]

        return self._series(derivs)

    def cos(self) -> "Jet":
        def derivs(u0, order):
            table = [np.cos(u0), -np.sin(u0), -np.cos(u0), np.sin(u0)]
            return [table[k % 4] for k in range(order + 1)]

        return self._series(derivs)

    def sinh(self) -> "Jet":
        def derivs(u0, order):
            s, c = np.sinh(u0), np.cosh(u0)
            return [s if k % 2 == 0 else c for k in range(order + 1)]

        return self._series(derivs)

    def cosh(self) -> "Jet":
        def derivs(u0, order):
            s, c = np.sinh(u0), np.cosh(u0)
            return [c if k % 2 == 0 else s for k in range(order + 1)]

        return self._series(derivs)

    def __repr__(self):
        return f"Jet({self.space!r}, value={np.asarray(self.value)!r})"


# -- generic dispatch helpers (work on jets and plain numerics alike) -------

def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Jet) else np.log(x)


def sin(x):
    return x.sin() if isinstance(x, Jet) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet) else np.cos(x)


def sinh(x):
    return x.sinh() if isinstance(x, Jet) else np.sinh(x)


def cosh(x):
    return x.cosh() if isinstance(x, Jet) else np.cosh(x)


# -- public entry points ----------------------------------------------------

def jet_eval(f: Callable, x: Sequence, order: int) -> Jet:
    """Evaluate ``f`` on seeded variables and return its jet at ``x``.

    ``f`` receives a list of jets (one per entry of ``x``, which may hold
    floats or broadcastable arrays for batched points) and must combine them
    with jet-aware operations.
    """
    space = jet_space(len(x), order)
    out = f(Jet.variables(space, x))
    if not isinstance(out, Jet):
        out = Jet.constant(space, out)
    return out


def jet_extract(jet: Jet, alpha) -> np.ndarray:
    """Raw partial derivative of ``jet`` at multi-index ``alpha``."""
    return jet.extract(alpha)


def derivative_jet(jet: Jet, mu: tuple[int, ...], target: JetSpace) -> Jet:
    """Jet of D^mu f in a lower-order space, gathered from ``jet``."""
    tbl = jet.space.shift_table(tuple(mu), target)
    return Jet(target, jet.c[..., tbl])
