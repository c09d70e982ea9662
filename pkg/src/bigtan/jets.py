"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients (derivative divided by the
multi-index factorial) of a smooth function at a base point, for every
monomial of total degree up to ``max_order``.  Jets may carry a leading
array shape, so a matrix of jets is a single object whose ``coeffs`` has
shape ``(rows, cols, n_monomials)``.

Monomials are ordered by degree, then by the multiset of variable indices.
The ordering of a lower order context is therefore a prefix of the higher
order one, which makes truncation a slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Sequence

import numpy as np

from .errors import ArgumentError, SingularityError

MAX_ORDER = 4


@dataclass(frozen=True)
class JetContext:
    """Number of differentiation variables and truncation order."""

    num_vars: int
    max_order: int

    def __post_init__(self):
        if not isinstance(self.num_vars, (int, np.integer)) or self.num_vars < 1:
            raise ArgumentError(f"num_vars must be >= 1, got {self.num_vars!r}")
        if self.max_order not in range(0, MAX_ORDER + 1):
            raise ArgumentError(f"max_order must be in 0..{MAX_ORDER}, got {self.max_order!r}")

    @property
    def tables(self) -> "_Tables":
        return _tables(self.num_vars, self.max_order)

    @property
    def size(self) -> int:
        return len(self.tables.exponents)

    @property
    def monomials(self) -> list[tuple[int, ...]]:
        return [tuple(int(e) for e in row) for row in self.tables.exponents]

    def lower(self, order: int) -> "JetContext":
        return context(self.num_vars, order)


@lru_cache(maxsize=None)
def context(num_vars: int, max_order: int) -> JetContext:
    return JetContext(int(num_vars), int(max_order))


class _Tables:
    __slots__ = ("exponents", "degree", "factorial", "index", "offsets", "mul_a", "mul_b",
                 "mul_starts", "diff_src", "diff_mult", "parent", "parent_var")

    def __init__(self, n: int, order: int):
        exps = []
        offsets = [0]
        for d in range(order + 1):
            for combo in combinations_with_replacement(range(n), d):
                e = [0] * n
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
            offsets.append(len(exps))
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self.degree = self.exponents.sum(axis=1)
        self.factorial = np.array([math.prod(math.factorial(k) for k in e) for e in exps], dtype=float)
        self.index = {e: i for i, e in enumerate(exps)}
        self.offsets = offsets

        # product table: pairs (a, b) with deg(a) + deg(b) <= order, grouped by a + b
        triples = []
        for a, ea in enumerate(exps):
            for b, eb in enumerate(exps):
                c = self.index.get(tuple(x + y for x, y in zip(ea, eb)))
                if c is not None:
                    triples.append((c, a, b))
        triples.sort()
        arr = np.array(triples, dtype=np.int64)
        self.mul_a = arr[:, 1]
        self.mul_b = arr[:, 2]
        self.mul_starts = np.searchsorted(arr[:, 0], np.arange(len(exps)))

        # d/dx_v maps the order-k basis onto the order-(k-1) basis
        m_low = offsets[order] if order >= 1 else 0
        self.diff_src = np.zeros((n, m_low), dtype=np.int64)
        self.diff_mult = np.zeros((n, m_low))
        for v in range(n):
            for j in range(m_low):
                e = list(exps[j])
                e[v] += 1
                self.diff_src[v, j] = self.index[tuple(e)]
                self.diff_mult[v, j] = e[v]

        # monomial alpha = parent(alpha) + e_{parent_var(alpha)}
        self.parent = np.zeros(len(exps), dtype=np.int64)
        self.parent_var = np.zeros(len(exps), dtype=np.int64)
        for i, e in enumerate(exps[1:], start=1):
            v = next(k for k, x in enumerate(e) if x > 0)
            low = list(e)
            low[v] -= 1
            self.parent[i] = self.index[tuple(low)]
            self.parent_var[i] = v


@lru_cache(maxsize=None)
def _tables(n: int, order: int) -> _Tables:
    return _Tables(n, order)


def _as_coeffs(ctx: JetContext, value) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    out = np.zeros(value.shape + (ctx.size,))
    out[..., 0] = value
    return out


class Jet:
    """Truncated Taylor expansion, possibly an array of them.

    Immutable by convention: every operation returns a new jet.
    """

    __slots__ = ("ctx", "coeffs")
    __array_ufunc__ = None

    def __init__(self, ctx: JetContext, coeffs, *, check: bool = True):
        coeffs = np.asarray(coeffs, dtype=float)
        if check:
            if coeffs.ndim < 1 or coeffs.shape[-1] != ctx.size:
                raise ArgumentError(
                    f"coefficient axis has length {coeffs.shape[-1] if coeffs.ndim else 0}, "
                    f"context needs {ctx.size}")
            if not np.all(np.isfinite(coeffs)):
                raise SingularityError("jet coefficients must be finite")
        self.ctx = ctx
        self.coeffs = coeffs

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, ctx: JetContext, value) -> "Jet":
        return cls(ctx, _as_coeffs(ctx, value), check=False)

    @classmethod
    def zeros(cls, ctx: JetContext, shape=()) -> "Jet":
        return cls(ctx, np.zeros(tuple(shape) + (ctx.size,)), check=False)

    @classmethod
    def stack(cls, jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        ctx = jets[0].ctx
        for j in jets:
            _same_ctx(ctx, j.ctx)
        ndim = jets[0].coeffs.ndim - 1
        if axis < 0:
            axis += ndim + 1
        return cls(ctx, np.stack([j.coeffs for j in jets], axis=axis), check=False)

    def _new(self, coeffs) -> "Jet":
        return Jet(self.ctx, coeffs, check=False)

    # -- array behaviour ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def order(self) -> int:
        return self.ctx.max_order

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __len__(self):
        if not self.shape:
            raise TypeError("scalar jet has no length")
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise ArgumentError("Ellipsis indexing is not supported on jets")
        n_real = sum(1 for i in idx if i is not None)
        if n_real > self.ndim:
            raise IndexError("too many indices for jet array")
        full = idx + (slice(None),) * (self.ndim - n_real) + (slice(None),)
        return self._new(self.coeffs[full])

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axes = tuple(range(self.ndim))
        else:
            axes = axis if isinstance(axis, tuple) else (axis,)
            axes = tuple(a + self.ndim if a < 0 else a for a in axes)
        return self._new(self.coeffs.sum(axis=axes))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return self._new(self.coeffs.reshape(tuple(shape) + (self.ctx.size,)))

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], tuple):
            axes = axes[0]
        return self._new(self.coeffs.transpose(tuple(axes) + (self.ndim,)))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def __repr__(self):
        return f"Jet(num_vars={self.ctx.num_vars}, order={self.order}, shape={self.shape}, value={self.value!r})"

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            _same_ctx(self.ctx, other.ctx)
            return other
        return Jet.constant(self.ctx, other)

    def __add__(self, other):
        return self._new(self.coeffs + self._coerce(other).coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return self._new(self.coeffs - self._coerce(other).coeffs)

    def __rsub__(self, other):
        return self._new(self._coerce(other).coeffs - self.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self._new(self.coeffs * np.asarray(other, dtype=float)[..., None])
        _same_ctx(self.ctx, other.ctx)
        return self._new(_mul(self.coeffs, other.coeffs, self.ctx.tables))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise SingularityError("division by zero")
            return self._new(self.coeffs / other[..., None])
        return _divide(self, other)

    def __rtruediv__(self, other):
        return _divide(self._coerce(other), self)

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            if k == 0.5:
                return self.sqrt()
            raise ArgumentError("only non-negative integer powers are supported")
        out = Jet.constant(self.ctx, np.ones(self.shape))
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def sqrt(self) -> "Jet":
        return _sqrt(self)

    def exp(self) -> "Jet":
        a0 = self.coeffs[..., 0]
        series = _series(self, [1.0 / math.factorial(k) for k in range(self.order + 1)])
        return series * np.exp(a0)

    def sin(self) -> "Jet":
        s, c = self._sincos()
        return s

    def cos(self) -> "Jet":
        s, c = self._sincos()
        return c

    def _sincos(self):
        a0 = self.coeffs[..., 0]
        k = self.order
        sin_t = _series(self, [0.0 if m % 2 == 0 else (-1) ** (m // 2) / math.factorial(m) for m in range(k + 1)])
        cos_t = _series(self, [0.0 if m % 2 else (-1) ** (m // 2) / math.factorial(m) for m in range(k + 1)])
        sin0, cos0 = np.sin(a0), np.cos(a0)
        return sin_t * cos0 + cos_t * sin0, cos_t * cos0 - sin_t * sin0

    # -- calculus -----------------------------------------------------------

    def partial(self, multi_index: Sequence[int] = ()) -> float | np.ndarray:
        """True partial derivative for an exponent tuple (missing entries are 0)."""
        mi = tuple(int(m) for m in multi_index)
        if len(mi) > self.ctx.num_vars or any(m < 0 for m in mi):
            raise ArgumentError(f"invalid multi-index {multi_index!r}")
        mi = mi + (0,) * (self.ctx.num_vars - len(mi))
        if sum(mi) > self.order:
            raise ArgumentError(f"multi-index order {sum(mi)} exceeds jet order {self.order}")
        tab = self.ctx.tables
        i = tab.index[mi]
        out = self.coeffs[..., i] * tab.factorial[i]
        return float(out) if out.ndim == 0 else out

    def derivative_tensor(self, k: int) -> np.ndarray:
        """Dense array of all k-th partials, shape ``self.shape + (n,) * k``."""
        n = self.ctx.num_vars
        out = np.zeros(self.shape + (n,) * k)
        for idx in product(range(n), repeat=k):
            mi = [0] * n
            for v in idx:
                mi[v] += 1
            out[(...,) + idx] = self.partial(mi)
        return out

    def diff(self, var: int) -> "Jet":
        """Partial derivative in variable ``var``; the result has one order less."""
        if not 0 <= var < self.ctx.num_vars:
            raise ArgumentError(f"variable index {var} out of range")
        if self.order < 1:
            raise ArgumentError("cannot differentiate an order-0 jet")
        tab = self.ctx.tables
        low = self.ctx.lower(self.order - 1)
        return Jet(low, self.coeffs[..., tab.diff_src[var]] * tab.diff_mult[var], check=False)

    def grad(self) -> "Jet":
        """Gradient as a jet array with a new trailing axis over the variables."""
        return Jet.stack([self.diff(v) for v in range(self.ctx.num_vars)], axis=-1)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ArgumentError(f"cannot truncate an order-{self.order} jet to order {order}")
        if order == self.order:
            return self
        low = self.ctx.lower(order)
        return Jet(low, self.coeffs[..., :low.size], check=False)

    def padded(self, order: int) -> "Jet":
        """Same coefficients in a higher order context, unknown terms set to 0.

        The result is only exact to ``self.order``; callers must account for
        the missing terms.
        """
        if order <= self.order:
            return self.truncate(order)
        high = self.ctx.lower(order)
        out = np.zeros(self.shape + (high.size,))
        out[..., :self.ctx.size] = self.coeffs
        return Jet(high, out, check=False)

    def embed(self, target: JetContext, var_map: Sequence[int]) -> "Jet":
        """Relabel variable ``i`` as ``var_map[i]`` of a larger context."""
        if len(var_map) != self.ctx.num_vars:
            raise ArgumentError("var_map must name one target variable per source variable")
        if target.max_order > self.order:
            raise ArgumentError("embedding cannot raise the truncation order")
        src = self.truncate(target.max_order)
        tab_t = target.tables
        out = np.zeros(self.shape + (target.size,))
        for i, e in enumerate(src.ctx.tables.exponents):
            te = [0] * target.num_vars
            for v, k in enumerate(e):
                te[var_map[v]] += int(k)
            out[..., tab_t.index[tuple(te)]] = src.coeffs[..., i]
        return Jet(target, out, check=False)

    def compose(self, inner: "Jet") -> "Jet":
        """Substitute displacement jets into this Taylor polynomial.

        ``inner`` has shape ``(num_vars,)`` in another context and zero
        constant terms; the result lives in the inner context.
        """
        if inner.shape != (self.ctx.num_vars,):
            raise ArgumentError("inner jets must have shape (num_vars,)")
        if inner.order > self.order:
            raise ArgumentError("inner order exceeds the order of the outer polynomial")
        if np.any(inner.coeffs[..., 0] != 0.0):
            raise ArgumentError("inner jets must have zero constant terms")
        tab = self.ctx.tables
        qtab = inner.ctx.tables
        powers = np.zeros((self.ctx.size, inner.ctx.size))
        powers[0, 0] = 1.0
        for a in range(1, self.ctx.size):
            if tab.degree[a] > inner.order:
                break
            powers[a] = _mul(powers[tab.parent[a]], inner.coeffs[tab.parent_var[a]], qtab)
        return Jet(inner.ctx, self.coeffs @ powers, check=False)


def _same_ctx(a: JetContext, b: JetContext):
    if a != b:
        raise ArgumentError(f"jet context mismatch: {a} vs {b}")


def _mul(a: np.ndarray, b: np.ndarray, tab: _Tables) -> np.ndarray:
    prod = a[..., tab.mul_a] * b[..., tab.mul_b]
    return np.add.reduceat(prod, tab.mul_starts, axis=-1)


def _degree_slice(ctx: JetContext, d: int) -> slice:
    off = ctx.tables.offsets
    return slice(off[d], off[d + 1])


def _divide(a: Jet, b: Jet) -> Jet:
    _same_ctx(a.ctx, b.ctx)
    b0 = b.coeffs[..., 0]
    if np.any(b0 == 0.0):
        raise SingularityError("division by a jet with zero constant term")
    shape = np.broadcast_shapes(a.shape, b.shape)
    q = np.zeros(shape + (a.ctx.size,))
    tab = a.ctx.tables
    for d in range(a.order + 1):
        r = a.coeffs - _mul(q, b.coeffs, tab)
        sl = _degree_slice(a.ctx, d)
        q[..., sl] = r[..., sl] / b0[..., None]
    return Jet(a.ctx, q, check=False)


def _sqrt(a: Jet) -> Jet:
    a0 = a.coeffs[..., 0]
    if np.any(a0 <= 0.0):
        raise SingularityError("square root of a jet with non-positive constant term")
    s0 = np.sqrt(a0)
    s = np.zeros(a.coeffs.shape)
    s[..., 0] = s0
    tab = a.ctx.tables
    for d in range(1, a.order + 1):
        r = a.coeffs - _mul(s, s, tab)
        sl = _degree_slice(a.ctx, d)
        s[..., sl] = r[..., sl] / (2.0 * s0[..., None])
    return Jet(a.ctx, s, check=False)


def _series(a: Jet, coeffs: Sequence[float]) -> Jet:
    """Evaluate sum_k coeffs[k] * (a - a0)^k by Horner's rule."""
    t = a._new(a.coeffs.copy())
    t.coeffs[..., 0] = 0.0
    out = Jet.constant(a.ctx, np.full(a.shape, coeffs[-1]))
    for c in reversed(coeffs[:-1]):
        out = out * t + c
    return out


# -- functional interface ---------------------------------------------------

def jet_variable(ctx: JetContext, index: int, value: float) -> Jet:
    """Jet of the coordinate function ``x_index`` at base value ``value``."""
    if not 0 <= index < ctx.num_vars:
        raise ArgumentError(f"variable index {index} out of range for {ctx.num_vars} variables")
    coeffs = np.zeros(ctx.size)
    coeffs[0] = value
    if ctx.max_order >= 1:
        e = [0] * ctx.num_vars
        e[index] = 1
        coeffs[ctx.tables.index[tuple(e)]] = 1.0
    return Jet(ctx, coeffs)


def variables(ctx: JetContext, values, offset: int = 0) -> Jet:
    """Coordinate jets for ``len(values)`` consecutive variables starting at ``offset``."""
    return Jet.stack([jet_variable(ctx, offset + i, v) for i, v in enumerate(np.asarray(values, float))])


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    ops = {"add": Jet.__add__, "sub": Jet.__sub__, "mul": Jet.__mul__, "div": Jet.__truediv__}
    if op not in ops:
        raise ArgumentError(f"unknown jet operation {op!r}")
    if isinstance(a, Jet) and isinstance(b, Jet):
        _same_ctx(a.ctx, b.ctx)
    return ops[op](a, b)


def jet_sqrt(a: Jet) -> Jet:
    return a.sqrt()


def extract_partial(a: Jet, multi_index: Sequence[int]) -> float:
    return a.partial(multi_index)


def sqrt(v):
    return v.sqrt() if isinstance(v, Jet) else np.sqrt(v)


def exp(v):
    return v.exp() if isinstance(v, Jet) else np.exp(v)


def sin(v):
    return v.sin() if isinstance(v, Jet) else np.sin(v)


def lincomb(matrix, v):
    """``matrix @ v`` for a float matrix and a vector of jets (or floats)."""
    matrix = np.asarray(matrix, dtype=float)
    if isinstance(v, Jet):
        return v._new(np.tensordot(matrix, v.coeffs, axes=(matrix.ndim - 1, 0)))
    return matrix @ np.asarray(v, dtype=float)


def dot(u, v):
    """Sum over the first axis of ``u * v``; either side may be a float array."""
    if isinstance(u, Jet) or isinstance(v, Jet):
        return (u * v).sum(axis=0) if isinstance(u, Jet) else (v * u).sum(axis=0)
    return np.dot(u, v)


def matmul(a, b):
    """Matrix product of 2-D jet arrays (or a jet matrix and a jet vector)."""
    if b.ndim == 1:
        return (a * b[None, :]).sum(axis=1)
    return (a[:, :, None] * b[None, :, :]).sum(axis=1)


def inverse(a: Jet) -> Jet:
    """Inverse of a square jet matrix by degree-wise correction."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError("inverse needs a square jet matrix")
    n = a.shape[0]
    a0 = a.coeffs[..., 0]
    try:
        a0_inv = np.linalg.inv(a0)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("constant part of the jet matrix is singular") from exc
    x = Jet.constant(a.ctx, a0_inv)
    eye = np.eye(n)
    for d in range(1, a.order + 1):
        r = (eye - matmul(a, x)).coeffs
        sl = _degree_slice(a.ctx, d)
        x.coeffs[..., sl] += np.einsum("ij,jkm->ikm", a0_inv, r[..., sl])
    return x
