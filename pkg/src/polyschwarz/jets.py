"""Third-order complex Taylor jets in several variables.

A :class:`Jet3` carries the value of a holomorphic function together with all
of its partial derivatives up to order three at a point (or at a batch of
points: every field may carry leading batch axes).  Arithmetic propagates the
Leibniz and Faa di Bruno rules exactly through order three, so the derivatives
produced are exact up to floating point rounding.

Second and third derivative arrays are kept fully symmetric: after every
operation the entries are re-gathered from the canonical positions
``i <= j`` and ``i <= j <= k``, so symmetry holds bit for bit.

The module also provides :func:`cauchy_oracle`, an independent route to the
same partial derivatives through discrete Cauchy integrals.  It only ever
calls the pointwise evaluator of a map, never the jet engine.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import (
    ContourRadiusError,
    DimensionError,
    SingularArgumentError,
    SingularDivisorError,
    SingularError,
)

DIV_THRESHOLD = 1e-13


@lru_cache(maxsize=None)
def _canonical_index(n: int, order: int) -> np.ndarray:
    """Flat indices pointing every multi-index at its sorted representative."""
    shape = (n,) * order
    idx = np.empty(n**order, dtype=np.intp)
    for flat, multi in enumerate(itertools.product(range(n), repeat=order)):
        idx[flat] = np.ravel_multi_index(tuple(sorted(multi)), shape)
    return idx


def _symmetrize(arr: np.ndarray, order: int) -> np.ndarray:
    n = arr.shape[-1]
    lead = arr.shape[:-order]
    flat = arr.reshape(lead + (n**order,))
    return flat[..., _canonical_index(n, order)].reshape(arr.shape)


class Jet3:
    """Truncated Taylor jet of a scalar holomorphic function.

    ``value`` has the batch shape ``B``; ``grad``, ``hess`` and ``third`` have
    shapes ``B + (n,)``, ``B + (n, n)`` and ``B + (n, n, n)``.  A jet built
    from lower-order data (``third=None``) has ``order == 2`` and arithmetic
    with it truncates accordingly.
    """

    __slots__ = ("value", "grad", "hess", "third")
    __array_priority__ = 100  # make ndarray * Jet3 defer to Jet3.__rmul__

    def __init__(self, value, grad, hess, third=None, *, canonical=False):
        self.value = np.asarray(value, dtype=complex)
        self.grad = np.asarray(grad, dtype=complex)
        hess = np.asarray(hess, dtype=complex)
        if third is not None:
            third = np.asarray(third, dtype=complex)
        if not canonical:
            hess = _symmetrize(hess, 2)
            if third is not None:
                third = _symmetrize(third, 3)
        self.hess = hess
        self.third = third

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    @property
    def order(self) -> int:
        return 2 if self.third is None else 3

    @property
    def batch_shape(self) -> tuple:
        return self.value.shape

    def __repr__(self):
        return f"Jet3(n={self.n}, order={self.order}, batch={self.batch_shape}, value={self.value!r})"

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, n: int, order: int = 3) -> "Jet3":
        value = np.asarray(value, dtype=complex)
        b = value.shape
        third = np.zeros(b + (n, n, n), complex) if order == 3 else None
        return cls(value, np.zeros(b + (n,), complex), np.zeros(b + (n, n), complex), third, canonical=True)

    def _like_constant(self, c) -> "Jet3":
        c = np.broadcast_to(np.asarray(c, dtype=complex), self.batch_shape)
        return Jet3.constant(c, self.n, self.order)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            if other.n != self.n:
                raise DimensionError(f"jet dimensions differ: {self.n} vs {other.n}")
            return other
        return self._like_constant(other)

    def __neg__(self):
        third = None if self.third is None else -self.third
        return Jet3(-self.value, -self.grad, -self.hess, third, canonical=True)

    def __add__(self, other):
        if not isinstance(other, Jet3):
            c = np.asarray(other, dtype=complex)
            return Jet3(self.value + c, self.grad, self.hess, self.third, canonical=True)
        other = self._coerce(other)
        third = _add3(self.third, other.third)
        return Jet3(self.value + other.value, self.grad + other.grad, self.hess + other.hess, third, canonical=True)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            c = np.asarray(other, dtype=complex)
            third = None if self.third is None else self.third * c[..., None, None, None]
            return Jet3(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None], third, canonical=True)
        b = self._coerce(other)
        a = self
        v = a.value * b.value
        ga, gb = a.grad, b.grad
        grad = ga * b.value[..., None] + a.value[..., None] * gb
        outer = ga[..., :, None] * gb[..., None, :]
        hess = a.hess * b.value[..., None, None] + outer + np.swapaxes(outer, -1, -2) + a.value[..., None, None] * b.hess
        third = None
        if a.third is not None and b.third is not None:
            third = (
                a.third * b.value[..., None, None, None]
                + a.value[..., None, None, None] * b.third
                + _sym_pair(a.hess, gb)
                + _sym_pair(b.hess, ga)
            )
        return Jet3(v, grad, hess, third)

    __rmul__ = __mul__

    def reciprocal(self, numerator_scale=1.0) -> "Jet3":
        x = self.value
        limit = DIV_THRESHOLD * (1.0 + np.abs(numerator_scale))
        if np.any(np.abs(x) < limit):
            mag = float(np.min(np.abs(x)))
            raise SingularDivisorError(f"division by near-zero jet value |b| = {mag:.3e}", mag)
        inv = 1.0 / x
        return _chain(self, inv, -inv * inv, 2 * inv**3, -6 * inv**4)

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            c = np.asarray(other, dtype=complex)
            if np.any(np.abs(c) < DIV_THRESHOLD * (1.0 + np.abs(self.value))):
                raise SingularDivisorError("division by near-zero constant", float(np.min(np.abs(c))))
            return self * (1.0 / c)
        other = self._coerce(other)
        return self * other.reciprocal(self.value)

    def __rtruediv__(self, other):
        c = np.asarray(other, dtype=complex)
        return self.reciprocal(c) * c

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            result = self._like_constant(1.0)
            base = self
            while k:
                if k & 1:
                    result = result * base
                k >>= 1
                if k:
                    base = base * base
            return result
        return jet_elementary(self, "pow", k)

    def derivative(self, multi_index) -> np.ndarray:
        """Partial derivative selected by a per-variable order tuple."""
        multi_index = tuple(int(m) for m in multi_index)
        if len(multi_index) != self.n:
            raise DimensionError("multi-index length must equal n")
        total = sum(multi_index)
        idx = [i for i, m in enumerate(multi_index) for _ in range(m)]
        if total == 0:
            return self.value
        if total == 1:
            return self.grad[..., idx[0]]
        if total == 2:
            return self.hess[..., idx[0], idx[1]]
        if total == 3 and self.third is not None:
            return self.third[..., idx[0], idx[1], idx[2]]
        raise ValueError(f"derivative order {total} exceeds jet order {self.order}")


def _add3(a, b):
    if a is None or b is None:
        return None
    return a + b


def _sym_pair(h, g):
    """h_ij g_k + h_ik g_j + h_jk g_i."""
    return (
        h[..., :, :, None] * g[..., None, None, :]
        + h[..., :, None, :] * g[..., None, :, None]
        + h[..., None, :, :] * g[..., :, None, None]
    )


def _chain(a: Jet3, d0, d1, d2, d3) -> Jet3:
    """Jet of phi(a) given phi and its first three derivatives at a.value."""
    g = a.grad
    grad = d1[..., None] * g
    outer = g[..., :, None] * g[..., None, :]
    hess = d2[..., None, None] * outer + d1[..., None, None] * a.hess
    third = None
    if a.third is not None:
        ggg = outer[..., :, :, None] * g[..., None, None, :]
        third = d3[..., None, None, None] * ggg + d2[..., None, None, None] * _sym_pair(a.hess, g) + d1[..., None, None, None] * a.third
    return Jet3(d0, grad, hess, third)


# -- public operations ----------------------------------------------------------

def seed_variable(index: int, value, n: int) -> Jet3:
    """Coordinate jet z_index at the given value."""
    if n < 2:
        raise DimensionError(f"dimension must be at least 2, got {n}")
    if not 0 <= index < n:
        raise DimensionError(f"variable index {index} out of range for n = {n}")
    value = np.asarray(value, dtype=complex)
    b = value.shape
    grad = np.zeros(b + (n,), complex)
    grad[..., index] = 1.0
    return Jet3(value, grad, np.zeros(b + (n, n), complex), np.zeros(b + (n, n, n), complex), canonical=True)


def seed_point(z) -> list[Jet3]:
    """Coordinate jets for every variable at z (shape ``(..., n)``)."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    return [seed_variable(i, z[..., i], n) for i in range(n)]


def jet_arith(a: Jet3, b: Jet3, op: str) -> Jet3:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_elementary(a: Jet3, func: str, p: float | complex | None = None) -> Jet3:
    """Principal-branch ``log``, ``pow`` (exponent ``p``) or ``exp`` of a jet."""
    x = a.value
    if func == "exp":
        e = np.exp(x)
        return _chain(a, e, e, e, e)
    if np.any(np.abs(x) < DIV_THRESHOLD):
        raise SingularArgumentError(f"{func} of a near-zero jet value", float(np.min(np.abs(x))))
    if func == "log":
        inv = 1.0 / x
        return _chain(a, np.log(x), inv, -inv * inv, 2 * inv**3)
    if func == "pow":
        if p is None:
            raise ValueError("pow needs an exponent")
        d0 = np.exp(p * np.log(x))
        inv = 1.0 / x
        d1 = p * d0 * inv
        d2 = p * (p - 1) * d0 * inv**2
        d3 = p * (p - 1) * (p - 2) * d0 * inv**3
        return _chain(a, d0, d1, d2, d3)
    raise ValueError(f"unknown elementary function {func!r}")


# -- Cauchy-integral oracle -----------------------------------------------------

def default_contour_radii(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.minimum(0.5 * (1.0 - np.abs(z)), 0.25)


def cauchy_taylor_coefficients(evaluate, z, radii=None, nodes: int = 64) -> np.ndarray:
    """Taylor coefficients of every output component around z.

    ``evaluate`` maps an array of points ``(..., n)`` to values ``(..., n)``.
    Returns an array of shape ``(n_out,) + (nodes,) * n`` whose entry
    ``[l, a_1, ..., a_n]`` is the coefficient of prod (w_i - z_i)^a_i in
    component l (valid for small a_i).
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    if nodes < 32:
        raise ValueError("quadrature needs at least 32 nodes")
    radii = default_contour_radii(z) if radii is None else np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(np.abs(z) + radii >= 1.0):
        raise ContourRadiusError(f"contour radii {radii} leave the unit polydisk around {z}")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    circle = np.exp(1j * theta)
    axes = [z[i] + radii[i] * circle for i in range(n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    try:
        values = np.asarray(evaluate(grid.reshape(-1, n)), dtype=complex)
    except SingularError as exc:
        raise ContourRadiusError(f"contour around {z} meets a singularity: {exc}") from exc
    values = values.reshape((nodes,) * n + (-1,))
    values = np.moveaxis(values, -1, 0)
    # trapezoid rule on each circle == DFT of the samples
    coeffs = np.fft.fftn(values, axes=tuple(range(1, n + 1))) / nodes**n
    powers = np.arange(nodes)
    for i in range(n):
        shape = [1] * (n + 1)
        shape[i + 1] = nodes
        with np.errstate(over="ignore"):
            coeffs = coeffs / (radii[i] ** powers).reshape(shape)
    return coeffs


def cauchy_oracle(map_expr, z, component: int, multi_index, nodes: int = 64, radii=None) -> complex:
    """Partial derivative of one component of a map by nested Cauchy integrals."""
    from .maps import eval_map

    multi_index = tuple(int(m) for m in multi_index)
    if sum(multi_index) > 3 or min(multi_index) < 0:
        raise ValueError("multi-index must have nonnegative orders summing to at most 3")
    z = np.asarray(z, dtype=complex)
    coeffs = cauchy_taylor_coefficients(lambda w: eval_map(map_expr, w), z, radii, nodes)
    factor = math.prod(math.factorial(m) for m in multi_index)
    return complex(coeffs[(component,) + multi_index] * factor)
