"""Truncated bivariate Taylor arithmetic.

A :class:`Jet2` of order K stores the coefficients c_ij of the monomials
u1**i * u2**j, i + j <= K, of a function expanded around a basepoint.  The
coefficient axis is always the last array axis; any leading axes are
"batch" axes (grid points, vector components, octonion coordinates) and
broadcast like ordinary numpy arrays.  So a jet-valued 3-vector over a
grid of P points is simply a ``Jet2`` with ``shape == (P, 3)``.

Storage is dense, graded-lex: degree 0, then (1,0), (0,1), then (2,0),
(1,1), (0,2), and so on.

Binary operations between jets of different orders truncate to the lower
order; the result is only known to that order anyway.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DivisionBySingularJet, DomainError, OrderExceeded

DEFAULT_ORDER = 4
EPS_JET = 1e-12


def ncoeffs(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def index(i: int, j: int) -> int:
    d = i + j
    return d * (d + 1) // 2 + j


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int], ...]:
    return tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))


@lru_cache(maxsize=None)
def _mul_tables(order):
    mons = monomials(order)
    left, right, out = [], [], []
    for p, (i1, j1) in enumerate(mons):
        for q, (i2, j2) in enumerate(mons):
            if i1 + j1 + i2 + j2 <= order:
                left.append(p)
                right.append(q)
                out.append(index(i1 + i2, j1 + j2))
    scatter = np.zeros((len(out), ncoeffs(order)))
    scatter[np.arange(len(out)), out] = 1.0
    return np.array(left), np.array(right), scatter


@lru_cache(maxsize=None)
def _diff_tables(order, axis):
    # d/du_axis maps monomial (i, j) of the order-K jet onto order K-1.
    src, dst, fac = [], [], []
    for p, (i, j) in enumerate(monomials(order)):
        e = (i, j)[axis]
        if e == 0:
            continue
        i2, j2 = (i - 1, j) if axis == 0 else (i, j - 1)
        src.append(p)
        dst.append(index(i2, j2))
        fac.append(float(e))
    return np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac)


def _is_jet(x):
    return isinstance(x, Jet2)


class Jet2:
    """Truncated Taylor polynomial in two variables, possibly batched."""

    __array_ufunc__ = None  # make numpy defer to our reflected operators

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if order < 0:
            raise ValueError("jet order must be >= 0")
        if coeffs.shape[-1:] != (ncoeffs(order),):
            raise ValueError(
                f"order {order} needs {ncoeffs(order)} coefficients, "
                f"got trailing axis {coeffs.shape[-1:]}"
            )
        self.order = order
        self.coeffs = coeffs

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Jet2":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (ncoeffs(order),))
        c[..., 0] = value
        return cls(order, c)

    @classmethod
    def variable(cls, value, axis: int, order: int) -> "Jet2":
        """The coordinate u_{axis+1} expanded around ``value``."""
        jet = cls.constant(value, order)
        if order >= 1:
            jet.coeffs[..., 1 + axis] = 1.0
        return jet

    @classmethod
    def from_monomials(cls, terms: dict, order: int) -> "Jet2":
        c = np.zeros(ncoeffs(order))
        for (i, j), v in terms.items():
            if i + j <= order:
                c[index(i, j)] = v
        return cls(order, c)

    # array-like plumbing --------------------------------------------------
    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    @property
    def ndim(self):
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0]

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, idx) -> "Jet2":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if Ellipsis not in idx:
            idx = idx + (Ellipsis,)
        return Jet2(self.order, self.coeffs[idx + (slice(None),)])

    def sum(self, axis: int = -1) -> "Jet2":
        if axis < 0:
            axis -= 1
        return Jet2(self.order, self.coeffs.sum(axis=axis))

    def reshape(self, *shape) -> "Jet2":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet2(self.order, self.coeffs.reshape(shape + (self.coeffs.shape[-1],)))

    def truncate(self, order: int) -> "Jet2":
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet2(order, self.coeffs[..., : ncoeffs(order)])

    def copy(self) -> "Jet2":
        return Jet2(self.order, self.coeffs.copy())

    def __repr__(self):
        return f"Jet2(order={self.order}, shape={self.shape})"

    # coercion -------------------------------------------------------------
    def _coerce(self, other):
        if _is_jet(other):
            if other.order == self.order:
                return self, other
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, Jet2.constant(other, self.order)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet2(a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet2(a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet2(a.order, b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet2(self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not _is_jet(other):
            other = np.asarray(other, dtype=float)
            return Jet2(self.order, self.coeffs * other[..., None])
        a, b = self._coerce(other)
        if a.order == 0:
            return Jet2(0, a.coeffs * b.coeffs)
        left, right, scatter = _mul_tables(a.order)
        return Jet2(a.order, (a.coeffs[..., left] * b.coeffs[..., right]) @ scatter)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _is_jet(other):
            other = np.asarray(other, dtype=float)
            if np.any(np.abs(other) < EPS_JET):
                raise DivisionBySingularJet("division by a (near) zero scalar")
            return Jet2(self.order, self.coeffs / other[..., None])
        return self * recip(other)

    def __rtruediv__(self, other):
        return recip(self) * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        out = Jet2.constant(np.ones(self.shape), self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # calculus -------------------------------------------------------------
    def diff(self, axis: int) -> "Jet2":
        """Jet of the partial derivative d/du_{axis+1}, one order lower."""
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        src, dst, fac = _diff_tables(self.order, axis)
        c = np.zeros(self.shape + (ncoeffs(self.order - 1),))
        c[..., dst] = self.coeffs[..., src] * fac
        return Jet2(self.order - 1, c)

    def partial(self, i: int, j: int) -> np.ndarray:
        """The partial derivative d^(i+j)/du1^i du2^j at the basepoint."""
        return extract_partial(self, (i, j))

    def gradient(self) -> np.ndarray:
        """First partials at the basepoint, stacked on a new last axis."""
        return np.stack([self.partial(1, 0), self.partial(0, 1)], axis=-1)

    def hessian(self) -> np.ndarray:
        h11, h12, h22 = self.partial(2, 0), self.partial(1, 1), self.partial(0, 2)
        return np.stack(
            [np.stack([h11, h12], -1), np.stack([h12, h22], -1)], axis=-2
        )


# ---------------------------------------------------------------------------
# module-level operations


def jet_arith(a: Jet2, b: Jet2, op: str) -> Jet2:
    ops = {"add": Jet2.__add__, "sub": Jet2.__sub__, "mul": Jet2.__mul__,
           "div": Jet2.__truediv__}
    try:
        return ops[op](a, b)
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None


def extract_partial(a: Jet2, multi_index) -> np.ndarray:
    i, j = multi_index
    if i < 0 or j < 0 or i + j > a.order:
        raise OrderExceeded(f"partial {multi_index} exceeds jet order {a.order}")
    return a.coeffs[..., index(i, j)] * (math.factorial(i) * math.factorial(j))


def _compose(a: Jet2, series) -> Jet2:
    """sum_k series[k] * (a - a0)**k with series[k] arrays over the batch."""
    delta = a - a.value
    out = Jet2.constant(series[-1], a.order)
    for c in reversed(series[:-1]):
        out = out * delta + c
    return out


def recip(a: Jet2) -> Jet2:
    a0 = a.value
    if np.any(np.abs(a0) < EPS_JET):
        raise DivisionBySingularJet("constant term of divisor below tolerance")
    inv = 1.0 / a0
    return _compose(a, [(-1) ** k * inv ** (k + 1) for k in range(a.order + 1)])


def _sqrt_jet(a: Jet2) -> Jet2:
    a0 = a.value
    if np.any(a0 <= 0):
        raise DomainError("sqrt of a jet needs a positive constant term")
    series = []
    coef = 1.0
    for k in range(a.order + 1):
        series.append(coef * a0 ** (0.5 - k))
        coef *= (0.5 - k) / (k + 1)
    return _compose(a, series)


def _exp_jet(a: Jet2) -> Jet2:
    e = np.exp(a.value)
    return _compose(a, [e / math.factorial(k) for k in range(a.order + 1)])


def _trig_jet(a: Jet2, phase: float) -> Jet2:
    a0 = a.value
    return _compose(
        a,
        [np.sin(a0 + phase + k * math.pi / 2) / math.factorial(k)
         for k in range(a.order + 1)],
    )


# The elementary functions below accept jets, numpy arrays and floats so that
# closed-form surface formulas can be written once and evaluated either way.


def sin(x):
    return _trig_jet(x, 0.0) if _is_jet(x) else np.sin(x)


def cos(x):
    return _trig_jet(x, math.pi / 2) if _is_jet(x) else np.cos(x)


def exp(x):
    return _exp_jet(x) if _is_jet(x) else np.exp(x)


def sqrt(x):
    if _is_jet(x):
        return _sqrt_jet(x)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("sqrt of a negative number")
    return np.sqrt(x)


def jet_elementary(a: Jet2, fn: str) -> Jet2:
    table = {"sin": sin, "cos": cos, "exp": exp, "sqrt": sqrt, "recip": recip}
    try:
        return table[fn](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {fn!r}") from None


# ---------------------------------------------------------------------------
# stacking and 3-vector helpers (jets or plain arrays)


def stack(parts, axis: int = -1):
    """Stack scalars/jets along a new leading axis (``axis`` counts leading axes)."""
    if not any(_is_jet(p) for p in parts):
        return np.stack([np.asarray(p, dtype=float) for p in parts], axis=axis)
    order = min(p.order for p in parts if _is_jet(p))
    shape = np.broadcast_shapes(*[np.shape(p.value) if _is_jet(p) else np.shape(p)
                                  for p in parts])
    cs = []
    for p in parts:
        j = p.truncate(order) if _is_jet(p) else Jet2.constant(p, order)
        cs.append(np.broadcast_to(j.coeffs, shape + (ncoeffs(order),)))
    if axis < 0:
        axis -= 1
    return Jet2(order, np.stack(cs, axis=axis))


def concat(parts, axis: int = -1):
    if not any(_is_jet(p) for p in parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts], axis=axis)
    order = min(p.order for p in parts if _is_jet(p))
    cs = [(p.truncate(order) if _is_jet(p) else Jet2.constant(p, order)).coeffs
          for p in parts]
    if axis < 0:
        axis -= 1
    return Jet2(order, np.concatenate(cs, axis=axis))


def dot(a, b):
    """Euclidean dot product over the last (leading) axis."""
    return (a * b).sum(-1) if _is_jet(a) or _is_jet(b) else np.sum(
        np.asarray(a) * np.asarray(b), axis=-1)


def cross(a, b):
    if not (_is_jet(a) or _is_jet(b)):
        return np.cross(a, b)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def vec3_ops(a, b):
    return {"dot": dot(a, b), "cross": cross(a, b)}


def value(x) -> np.ndarray:
    """Basepoint value of a jet, or the array itself."""
    return x.value if _is_jet(x) else np.asarray(x, dtype=float)


def partials(x) -> np.ndarray:
    """First partials of a jet-valued array, stacked on a new last axis."""
    return x.gradient()


Jet2Vec3 = Jet2  # a Jet2 whose last leading axis has length 3
