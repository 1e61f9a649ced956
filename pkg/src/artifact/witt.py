"""Truncated Witt vectors in equal characteristic, W_h(A) = A[pi]/pi^h.

The array functions work on int arrays of shape (..., h) whose last axis holds
the pi-adic coefficients; the small classes below wrap single vectors.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def witt_add(F, a, b):
    return F.add(a, b)


def witt_sub(F, a, b):
    return F.sub(a, b)


def witt_neg(F, a):
    return F.neg(a)


def witt_mul(F, a, b):
    """Truncated power-series product along the last axis."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    h = a.shape[-1]
    if b.shape[-1] != h:
        raise ParameterError("length mismatch")
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.int64)
    for i in range(h):
        ai = a[..., i]
        if not np.any(ai):
            continue
        for j in range(h - i):
            out[..., i + j] = F.add(out[..., i + j], F.mul(ai, b[..., j]))
    return out


def witt_inv(F, a):
    a = np.asarray(a, dtype=np.int64)
    if np.any(a[..., 0] == 0):
        raise ZeroDivisionError("not a Witt unit")
    h = a.shape[-1]
    c = np.zeros_like(a)
    u = F.inv(a[..., 0])
    c[..., 0] = u
    for i in range(1, h):
        acc = np.zeros(a.shape[:-1], dtype=np.int64)
        for j in range(1, i + 1):
            acc = F.add(acc, F.mul(a[..., j], c[..., i - j]))
        c[..., i] = F.neg(F.mul(u, acc))
    return c


def witt_scale(F, a, shift):
    """Multiply by pi^shift (shift >= 0), truncating."""
    a = np.asarray(a, dtype=np.int64)
    if shift < 0:
        raise ParameterError("negative shift")
    out = np.zeros_like(a)
    h = a.shape[-1]
    if shift < h:
        out[..., shift:] = a[..., :h - shift]
    return out


def verschiebung(F, a):
    return witt_scale(F, a, 1)


def witt_frobenius(F, a, e=1):
    """Coordinatewise x -> x^{q^e}."""
    return F.frob(a, e)


def reduce_level(a, hp):
    a = np.asarray(a)
    if hp > a.shape[-1] or hp < 0:
        raise ParameterError("cannot reduce to a higher level")
    return a[..., :hp].copy()


def twisted_mul(F, a, b):
    """Product in the twisted ring: c_i = sum_j a_j^{q^{i-j}} b_{i-j}^{q^i}."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    h = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for i in range(h):
        for j in range(i + 1):
            term = F.mul(F.frob(a[..., j], i - j), F.frob(b[..., i - j], i))
            out[..., i] = F.add(out[..., i], term)
    return out


def twisted_mul_symmetric(F, a, b):
    """Variant c_i = sum_j a_j^{q^{i-j}} b_{i-j}^{q^j}, isomorphic to A[[pi]]."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    h = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for i in range(h):
        for j in range(i + 1):
            term = F.mul(F.frob(a[..., j], i - j), F.frob(b[..., i - j], j))
            out[..., i] = F.add(out[..., i], term)
    return out


def witt_mult_matrix(F, c, h):
    """F_p-matrix realizing x -> c*x on W_h(K) with digit-flattened coordinates."""
    c = np.asarray(c, dtype=np.int64)
    k = F.k
    M = np.zeros((h * k, h * k), dtype=np.int64)
    for i in range(h):
        for j in range(h - i):
            # output level i+j receives c_i * x_j
            M[(i + j) * k:(i + j + 1) * k, j * k:(j + 1) * k] += F.mult_matrix(c[i])
    return M % F.p


class WittVec:
    """A single element of W_h(K)."""

    __slots__ = ("F", "coeffs")

    def __init__(self, F, coeffs):
        self.F = F
        self.coeffs = np.asarray(coeffs, dtype=np.int64).copy()

    @property
    def h(self):
        return self.coeffs.shape[0]

    @classmethod
    def one(cls, F, h):
        c = np.zeros(h, dtype=np.int64)
        c[0] = 1
        return cls(F, c)

    @classmethod
    def zero(cls, F, h):
        return cls(F, np.zeros(h, dtype=np.int64))

    def _check(self, o):
        if not isinstance(o, WittVec) or o.h != self.h or o.F is not self.F:
            raise ParameterError("incompatible Witt vectors")

    def __add__(self, o):
        self._check(o)
        return WittVec(self.F, witt_add(self.F, self.coeffs, o.coeffs))

    def __sub__(self, o):
        self._check(o)
        return WittVec(self.F, witt_sub(self.F, self.coeffs, o.coeffs))

    def __neg__(self):
        return WittVec(self.F, witt_neg(self.F, self.coeffs))

    def __mul__(self, o):
        self._check(o)
        return WittVec(self.F, witt_mul(self.F, self.coeffs, o.coeffs))

    def inverse(self):
        return WittVec(self.F, witt_inv(self.F, self.coeffs))

    def is_unit(self):
        return self.coeffs[0] != 0

    def V(self):
        return WittVec(self.F, verschiebung(self.F, self.coeffs))

    def sigma(self, e=1):
        return WittVec(self.F, witt_frobenius(self.F, self.coeffs, e))

    def reduce(self, hp):
        return WittVec(self.F, reduce_level(self.coeffs, hp))

    def __eq__(self, o):
        return isinstance(o, WittVec) and o.h == self.h and bool(np.all(o.coeffs == self.coeffs))

    def __hash__(self):
        return hash(tuple(self.coeffs.tolist()))

    def tolist(self):
        return [int(c) for c in self.coeffs]

    def __repr__(self):
        return f"WittVec({self.tolist()})"


class TwistedWittVec(WittVec):
    """Element of the twisted ring; addition is coordinatewise."""

    def __add__(self, o):
        return TwistedWittVec(self.F, super().__add__(o).coeffs)

    def __sub__(self, o):
        return TwistedWittVec(self.F, super().__sub__(o).coeffs)

    def __neg__(self):
        return TwistedWittVec(self.F, witt_neg(self.F, self.coeffs))

    def __mul__(self, o):
        self._check(o)
        return TwistedWittVec(self.F, twisted_mul(self.F, self.coeffs, o.coeffs))

    def inverse(self):
        raise NotImplementedError("inverse is not provided for the twisted ring")


class LatticeVec:
    """Column vector of n Witt vectors with the shape rule of the lattice model.

    Component i (1-based) is a full length-h vector when i = 1 mod n0.  Other
    components live in W_{h-1} (stored with a zero level h-1) or, for the
    ``plus`` variant, in V W_h (level 0 forced to zero).
    """

    def __init__(self, F, n, n0, h, comps, plus=False):
        self.F, self.n, self.n0, self.h, self.plus = F, n, n0, h, plus
        self.comps = np.asarray(comps, dtype=np.int64).reshape(n, h).copy()
        if not self.shape_ok():
            raise ParameterError("component violates the lattice shape rule")

    def shape_ok(self):
        for i in range(1, self.n + 1):
            if (i - 1) % self.n0 == 0:
                continue
            if self.plus and self.comps[i - 1, 0] != 0:
                return False
            if not self.plus and self.comps[i - 1, self.h - 1] != 0:
                return False
        return True

    def sigma(self, e=1):
        return LatticeVec(self.F, self.n, self.n0, self.h, self.F.frob(self.comps, e), self.plus)

    def __eq__(self, o):
        return isinstance(o, LatticeVec) and bool(np.all(self.comps == o.comps))

    def __repr__(self):
        return f"LatticeVec({self.comps.tolist()}, plus={self.plus})"
