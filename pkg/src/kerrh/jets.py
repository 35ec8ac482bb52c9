"""Truncated bivariate Taylor jets in (r, theta), vectorised over sample points.

A :class:`Jet` stores normalised Taylor coefficients ``c[k]`` of a function of
``(r, theta)`` around a batch of base points.  The coefficient array has shape
``(K, *comp, npts)``: ``K`` monomials ``dr**i * dth**j`` with ``i + j <= order``
sorted by total degree, optional tensor component axes, and the point axis
last.  Arithmetic obeys the Leibniz and chain rules exactly up to ``order``.

A jet may also carry a *mode* ``(om, mp)``: the represented field is then the
amplitude times ``exp(i (mp * phi - om * t))``.  Products add modes, conjugation
negates them, and sums require equal modes.  The ``t`` and ``phi`` derivatives
are not taken here; the background multiplies by ``-i om`` and ``i mp``.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from functools import cache

import numpy as np

from .errors import ModeMismatch, UnsupportedOrder

__all__ = [
    "Jet",
    "Jet2",
    "contract",
    "cos",
    "exp",
    "linear",
    "log",
    "monomials",
    "n_coef",
    "power",
    "sin",
    "sqrt",
    "stack",
]


def n_coef(order: int) -> int:
    """Number of monomials of total degree at most ``order`` in two variables."""
    return (order + 1) * (order + 2) // 2


@cache
def monomials(order: int) -> tuple[tuple[int, int], ...]:
    """Exponent pairs ``(i, j)`` sorted by degree, ``dr`` power descending."""
    return tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))


@cache
def _index(order: int) -> dict[tuple[int, int], int]:
    return {mono: k for k, mono in enumerate(monomials(order))}


@cache
def _product_table(order: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    idx = _index(order)
    table = []
    for i, j in monomials(order):
        pairs = []
        for i1 in range(i + 1):
            for j1 in range(j + 1):
                pairs.append((idx[(i1, j1)], idx[(i - i1, j - j1)]))
        table.append(tuple(pairs))
    return tuple(table)


@cache
def _deriv_table(order: int, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Source indices and factors for ``d/dr`` (axis 0) or ``d/dth`` (axis 1)."""
    idx = _index(order)
    src, fac = [], []
    for i, j in monomials(order - 1):
        if axis == 0:
            src.append(idx[(i + 1, j)])
            fac.append(i + 1)
        else:
            src.append(idx[(i, j + 1)])
            fac.append(j + 1)
    return np.array(src), np.array(fac, dtype=float)


def _mode_equal(x, y) -> bool:
    if x is y:
        return True
    x, y = np.broadcast_arrays(x, y)
    return bool(np.array_equal(x, y))


def _is_const(x) -> bool:
    return isinstance(x, (int, float, complex, np.number, np.ndarray))


class Jet:
    """Truncated Taylor jet with optional tensor components and mode phase."""

    __slots__ = ("c", "mp", "om", "order")
    __array_ufunc__ = None

    def __init__(self, c: np.ndarray, order: int, om=0.0, mp=0.0):
        c = np.asarray(c)
        if c.shape[0] != n_coef(order):
            raise ValueError(f"coefficient axis {c.shape[0]} does not match order {order}")
        self.c = c
        self.order = order
        self.om = om
        self.mp = mp

    # ------------------------------------------------------------------ build
    @classmethod
    def variable(cls, x0, axis: int, order: int = 2) -> Jet:
        """Seed jet for ``r`` (axis 0) or ``theta`` (axis 1) at base points ``x0``."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        c = np.zeros((n_coef(order),) + x0.shape, dtype=complex)
        c[0] = x0
        if order >= 1:
            c[1 + axis] = 1.0
        return cls(c, order)

    @classmethod
    def const(cls, value, npts: int, order: int = 2, comp: tuple[int, ...] = ()) -> Jet:
        c = np.zeros((n_coef(order),) + comp + (npts,), dtype=complex)
        c[0] = value
        return cls(c, order)

    @classmethod
    def zeros(cls, npts: int, order: int = 2, comp: tuple[int, ...] = (), om=0.0, mp=0.0) -> Jet:
        return cls(np.zeros((n_coef(order),) + comp + (npts,), dtype=complex), order, om, mp)

    @classmethod
    def from_derivatives(cls, value, d_r=0.0, d_th=0.0, d_rr=0.0, d_rth=0.0, d_thth=0.0) -> Jet:
        """Order-2 jet from a value, gradient and Hessian (each scalar or 1-d)."""
        parts = np.broadcast_arrays(*[np.atleast_1d(np.asarray(v, dtype=complex))
                                      for v in (value, d_r, d_th, d_rr, d_rth, d_thth)])
        v, dr, dt, drr, drt, dtt = parts
        return cls(np.stack([v, dr, dt, 0.5 * drr, drt, 0.5 * dtt]), 2)

    # ------------------------------------------------------------- accessors
    @property
    def comp(self) -> tuple[int, ...]:
        return self.c.shape[1:-1]

    @property
    def npts(self) -> int:
        return self.c.shape[-1]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def d_r(self) -> np.ndarray:
        self._need(1)
        return self.c[1]

    @property
    def d_th(self) -> np.ndarray:
        self._need(1)
        return self.c[2]

    @property
    def d_rr(self) -> np.ndarray:
        self._need(2)
        return 2.0 * self.c[3]

    @property
    def d_rth(self) -> np.ndarray:
        self._need(2)
        return self.c[4]

    @property
    def d_thth(self) -> np.ndarray:
        self._need(2)
        return 2.0 * self.c[5]

    def _need(self, order: int) -> None:
        if self.order < order:
            raise UnsupportedOrder(f"jet of order {self.order} has no order-{order} data")

    def __getitem__(self, idx) -> Jet:
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) > len(self.comp):
            raise IndexError("too many component indices")
        return Jet(self.c[(slice(None),) + idx], self.order, self.om, self.mp)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, comp={self.comp}, npts={self.npts})"

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise UnsupportedOrder(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.c[: n_coef(order)], order, self.om, self.mp)

    def with_mode(self, om, mp) -> Jet:
        return Jet(self.c, self.order, om, mp)

    # ------------------------------------------------------------ arithmetic
    def _coerce(self, other) -> Jet | None:
        if isinstance(other, Jet):
            return other
        return None

    def _add(self, other, sign: float) -> Jet:
        o = self._coerce(other)
        if o is None:
            if not _is_const(other):
                return NotImplemented
            c = self.c.copy()
            c[0] = c[0] + sign * np.asarray(other)
            return Jet(c, self.order, self.om, self.mp)
        om, mp = self.om, self.mp
        if not (_mode_equal(self.om, o.om) and _mode_equal(self.mp, o.mp)):
            if not np.any(o.c):
                return self.truncate(min(self.order, o.order))
            if not np.any(self.c):
                om, mp = o.om, o.mp
            else:
                raise ModeMismatch("cannot add jets carrying different modes")
        n = min(self.order, o.order)
        k = n_coef(n)
        return Jet(self.c[:k] + sign * o.c[:k], n, om, mp)

    def __add__(self, other):
        return self._add(other, 1.0)

    def __radd__(self, other):
        return self._add(other, 1.0)

    def __sub__(self, other):
        return self._add(other, -1.0)

    def __rsub__(self, other):
        return (-self)._add(other, 1.0)

    def __neg__(self) -> Jet:
        return Jet(-self.c, self.order, self.om, self.mp)

    def __pos__(self) -> Jet:
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if not _is_const(other):
                return NotImplemented
            return Jet(self.c * np.asarray(other), self.order, self.om, self.mp)
        if self.comp and o.comp:
            raise ValueError("use contract() for products of two tensor-valued jets")
        n = min(self.order, o.order)
        c = _leibniz(self.c, o.c, n, np.multiply)
        return Jet(c, n, self.om + o.om, self.mp + o.mp)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if not _is_const(other):
                return NotImplemented
            return Jet(self.c / np.asarray(other), self.order, self.om, self.mp)
        return self * reciprocal(o)

    def __rtruediv__(self, other):
        if not _is_const(other):
            return NotImplemented
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            return _int_power(self, int(p))
        return power(self, p)

    def conj(self) -> Jet:
        return Jet(np.conj(self.c), self.order, -self.om, -self.mp)

    @property
    def real(self) -> Jet:
        self._no_mode("real part")
        return Jet(self.c.real.astype(complex), self.order)

    @property
    def imag(self) -> Jet:
        self._no_mode("imaginary part")
        return Jet(self.c.imag.astype(complex), self.order)

    def _no_mode(self, what: str) -> None:
        if np.any(self.om) or np.any(self.mp):
            raise ModeMismatch(f"{what} of a mode-carrying jet is not a mode field")

    # ---------------------------------------------------------- derivatives
    def dr(self) -> Jet:
        """Partial derivative in ``r``; lowers the order by one."""
        return self._diff(0)

    def dth(self) -> Jet:
        """Partial derivative in ``theta``; lowers the order by one."""
        return self._diff(1)

    def _diff(self, axis: int) -> Jet:
        if self.order == 0:
            raise UnsupportedOrder("cannot differentiate an order-0 jet")
        src, fac = _deriv_table(self.order, axis)
        fac = fac.reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[src] * fac, self.order - 1, self.om, self.mp)


Jet2 = Jet
"""Order-2 jets are the working precision of the library; the class is shared."""


def _leibniz(a: np.ndarray, b: np.ndarray, order: int, op: Callable) -> np.ndarray:
    out = []
    for pairs in _product_table(order):
        k1, k2 = pairs[0]
        acc = op(a[k1], b[k2])
        for k1, k2 in pairs[1:]:
            acc = acc + op(a[k1], b[k2])
        out.append(acc)
    return np.stack(out)


def _int_power(x: Jet, p: int) -> Jet:
    if p < 0:
        return reciprocal(_int_power(x, -p))
    result = None
    base = x
    while p:
        if p & 1:
            result = base if result is None else result * base
        p >>= 1
        if p:
            base = base * base
    if result is None:
        return Jet.const(1.0, x.npts, x.order, x.comp)
    return result


def _compose(x: Jet, taylor: Sequence[np.ndarray]) -> Jet:
    """Evaluate ``sum_n taylor[n] * (x - x0)**n`` with ``taylor[n] = f^(n)(x0)/n!``."""
    x._no_mode("elementary function")
    h = Jet(x.c.copy(), x.order)
    h.c[0] = 0.0
    c = np.zeros_like(x.c)
    c[0] = taylor[0]
    acc = Jet(c, x.order)
    hn = None
    for n in range(1, x.order + 1):
        hn = h if hn is None else hn * h
        acc = acc + hn * taylor[n]
    return acc


def _factorials(order: int) -> list[float]:
    out = [1.0]
    for n in range(1, order + 1):
        out.append(out[-1] * n)
    return out


def reciprocal(x: Jet) -> Jet:
    x0 = x.c[0]
    taylor = [(-1.0) ** n / x0 ** (n + 1) for n in range(x.order + 1)]
    if np.any(x.om) or np.any(x.mp):
        base = Jet(x.c, x.order)
        return Jet(_compose(base, taylor).c, x.order, -x.om, -x.mp)
    return _compose(x, taylor)


def exp(x: Jet) -> Jet:
    e = np.exp(x.c[0])
    fact = _factorials(x.order)
    return _compose(x, [e / fact[n] for n in range(x.order + 1)])


def log(x: Jet) -> Jet:
    x0 = x.c[0]
    taylor = [np.log(x0)] + [(-1.0) ** (n - 1) / (n * x0 ** n) for n in range(1, x.order + 1)]
    return _compose(x, taylor)


def power(x: Jet, p: float) -> Jet:
    x0 = x.c[0]
    taylor = []
    coef = 1.0
    for n in range(x.order + 1):
        taylor.append(coef * x0 ** (p - n))
        coef = coef * (p - n) / (n + 1)
    return _compose(x, taylor)


def sqrt(x: Jet) -> Jet:
    return power(x, 0.5)


def sin(x: Jet) -> Jet:
    x0 = x.c[0]
    cyc = [np.sin(x0), np.cos(x0), -np.sin(x0), -np.cos(x0)]
    fact = _factorials(x.order)
    return _compose(x, [cyc[n % 4] / fact[n] for n in range(x.order + 1)])


def cos(x: Jet) -> Jet:
    x0 = x.c[0]
    cyc = [np.cos(x0), -np.sin(x0), -np.cos(x0), np.sin(x0)]
    fact = _factorials(x.order)
    return _compose(x, [cyc[n % 4] / fact[n] for n in range(x.order + 1)])


def stack(jets: Iterable[Jet]) -> Jet:
    """Stack equally shaped jets along a new leading component axis."""
    jets = list(jets)
    order = min(j.order for j in jets)
    k = n_coef(order)
    ref = jets[0]
    for j in jets[1:]:
        if not (_mode_equal(ref.om, j.om) and _mode_equal(ref.mp, j.mp)):
            raise ModeMismatch("cannot stack jets carrying different modes")
    return Jet(np.stack([j.c[:k] for j in jets], axis=1), order, ref.om, ref.mp)


def _point_spec(spec: str) -> str:
    ins, out = spec.split("->")
    ins = ",".join(s + "Z" for s in ins.split(","))
    return f"{ins}->{out}Z"


def contract(spec: str, a: Jet, b: Jet) -> Jet:
    """Leibniz product of two tensor jets with ``np.einsum`` component contraction.

    ``spec`` addresses component axes only, e.g. ``"ab,b->a"``; the point axis
    is appended automatically.
    """
    n = min(a.order, b.order)
    full = _point_spec(spec)
    c = _leibniz(a.c, b.c, n, lambda x, y: np.einsum(full, x, y))
    return Jet(c, n, a.om + b.om, a.mp + b.mp)


def linear(spec: str, tensor: np.ndarray, a: Jet) -> Jet:
    """Apply a constant tensor to the components of ``a``, e.g. ``"ab,b->a"``."""
    ins, out = spec.split("->")
    t_idx, a_idx = ins.split(",")
    full = f"{t_idx},K{a_idx}Z->K{out}Z"
    return Jet(np.einsum(full, tensor, a.c), a.order, a.om, a.mp)
