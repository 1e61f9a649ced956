"""Finite field towers and exact linear algebra over them.

One ambient field K = F_{q^N} (q = p^a) is built per tower.  Elements are
plain integers: the base-p digits of an integer are the coefficients of the
element as a polynomial in the root of the defining modulus.  Arithmetic goes
through exponential/logarithm tables, which makes every operation a handful of
numpy gathers and lets whole arrays of elements be processed at once.

The modulus is the primitive polynomial of degree a*N with the smallest
integer encoding (coefficients read as base-p digits), so the root generates
K^x and the log table is total on nonzero elements.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .errors import ConsistencyError, ParameterError, WidenField

MAX_ORDER = 1 << 22


# ---------------------------------------------------------------------------
# small polynomial helpers over F_p (lists, low degree first)

def _prime_factors(m):
    out, d = [], 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def _poly_mulmod(f, g, mod, p):
    k = len(mod) - 1
    prod = [0] * (len(f) + len(g) - 1)
    for i, fi in enumerate(f):
        if fi:
            for j, gj in enumerate(g):
                prod[i + j] = (prod[i + j] + fi * gj) % p
    # mod is monic
    for i in range(len(prod) - 1, k - 1, -1):
        c = prod[i]
        if c:
            for j in range(k + 1):
                prod[i - k + j] = (prod[i - k + j] - c * mod[j]) % p
    prod = prod[:k] + [0] * max(0, k - len(prod))
    return prod


def _poly_powmod_x(e, mod, p):
    """X^e modulo mod, as a coefficient list of length deg(mod)."""
    k = len(mod) - 1
    result = [1] + [0] * (k - 1)
    base = [0, 1] + [0] * (k - 2) if k >= 2 else _poly_mulmod([0, 1], [1], mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def is_primitive_poly(mod, p):
    """True when the monic polynomial ``mod`` is primitive over F_p."""
    k = len(mod) - 1
    if mod[0] % p == 0:
        return False
    order = p ** k - 1
    one = [1] + [0] * (k - 1)
    if _poly_powmod_x(order, mod, p) != one:
        return False
    return all(_poly_powmod_x(order // ell, mod, p) != one for ell in _prime_factors(order))


def _poly_divmod(f, g, p):
    f = list(f)
    dg = max(i for i, c in enumerate(g) if c % p)
    inv_lead = pow(g[dg], -1, p)
    q = [0] * max(1, len(f) - dg)
    for i in range(len(f) - 1, dg - 1, -1):
        c = f[i] % p
        if c:
            t = c * inv_lead % p
            q[i - dg] = t
            for j in range(dg + 1):
                f[i - dg + j] = (f[i - dg + j] - t * g[j]) % p
    return q, [c % p for c in f[:dg]] or [0]


def _poly_gcd(f, g, p):
    def trim(h):
        h = [c % p for c in h]
        while len(h) > 1 and h[-1] == 0:
            h.pop()
        return h

    f, g = trim(f), trim(g)
    while any(g):
        _, r = _poly_divmod(f, g, p)
        f, g = g, trim(r)
    return f


def is_irreducible_poly(mod, p):
    """Irreducibility test by gcd(f, X^{p^i} - X) = 1 for i <= deg/2."""
    k = len(mod) - 1
    if k == 1:
        return True
    xp = [0, 1] + [0] * (k - 2)
    for _ in range(k // 2):
        # xp <- xp^p mod f
        acc = [1] + [0] * (k - 1)
        for _ in range(p):
            acc = _poly_mulmod(acc, xp, mod, p)
        xp = acc
        h = list(xp)
        h[1] = (h[1] - 1) % p
        g = _poly_gcd(list(mod), h, p)
        if len(g) > 1:
            return False
    return True


def least_primitive_poly(p, k):
    """Monic primitive polynomial of degree k with the least integer encoding."""
    for code in range(1, p ** k):
        low = [(code // p ** i) % p for i in range(k)]
        mod = low + [1]
        if is_primitive_poly(mod, p):
            return tuple(mod)
    raise ConsistencyError("no primitive polynomial found")


# ---------------------------------------------------------------------------

class FieldTower:
    """The ambient field F_{q^N} with q = p^a, plus its subfields F_{q^m}, m | N."""

    def __init__(self, p, a=1, N=1, modulus=None):
        if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ParameterError(f"p={p} is not prime")
        if a < 1 or N < 1:
            raise ParameterError("a and N must be positive")
        self.p, self.a, self.N = p, a, N
        self.k = a * N
        self.q = p ** a
        self.order = p ** self.k
        if self.order > MAX_ORDER:
            raise WidenField(f"field of order {self.order} exceeds the table limit")
        if modulus is None:
            modulus = least_primitive_poly(p, self.k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != self.k + 1 or modulus[-1] != 1:
            raise ParameterError("modulus must be monic of degree a*N")
        if not is_primitive_poly(list(modulus), p):
            raise ParameterError("modulus must be primitive")
        self.modulus = modulus
        self.subfield_degrees = {m for m in range(1, N + 1) if N % m == 0}
        self._build_tables()

    # -- construction -------------------------------------------------------
    def _build_tables(self):
        p, k, Q = self.p, self.k, self.order
        self.pw = p ** np.arange(k, dtype=np.int64)
        x = np.arange(Q, dtype=np.int64)
        self.dig = ((x[:, None] // self.pw[None, :]) % p).astype(np.uint8)
        # companion matrix of multiplication by the root, on digit columns
        C = np.zeros((k, k), dtype=np.int64)
        for i in range(k - 1):
            C[i + 1, i] = 1
        C[:, k - 1] = [(-c) % p for c in self.modulus[:k]]
        D = np.zeros((Q - 1, k), dtype=np.int64)
        D[0, 0] = 1
        filled, P = 1, C.copy()
        while filled < Q - 1:
            take = min(filled, Q - 1 - filled)
            D[filled:filled + take] = (D[:take] @ P.T) % p
            filled += take
            P = (P @ P) % p
        e = D @ self.pw
        if len(np.unique(e)) != Q - 1:
            raise ConsistencyError("modulus root is not primitive")
        self.exp = np.concatenate([e, e]).astype(np.int64)
        self.log = np.zeros(Q, dtype=np.int64)
        self.log[e] = np.arange(Q - 1, dtype=np.int64)
        if p != 2:
            d = self.dig[e].astype(np.int64)
            d[:, 0] = (d[:, 0] + 1) % p
            enc = d @ self.pw
            self.zech = np.where(enc == 0, -1, self.log[enc])
            self.half = (Q - 1) // 2

    def to_json(self):
        return {"p": self.p, "a": self.a, "N": self.N, "modulus_coeffs": list(self.modulus)}

    def __repr__(self):
        return f"FieldTower(p={self.p}, a={self.a}, N={self.N})"

    # -- elementwise arithmetic on ints / int arrays ----------------------
    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        la, lb = self.log[a], self.log[b]
        z = self.zech[(lb - la) % (self.order - 1)]
        res = np.where(z < 0, 0, self.exp[la + np.maximum(z, 0)])
        return np.where(a == 0, b, np.where(b == 0, a, res))

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        return np.where(a == 0, 0, self.exp[self.log[a] + self.half])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        res = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, res)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.exp[(-self.log[a]) % (self.order - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, e):
        a = np.asarray(a, dtype=np.int64)
        e = np.asarray(e, dtype=np.int64)
        if np.any((e < 0) & (a == 0)):
            raise ZeroDivisionError("negative power of zero")
        res = self.exp[(self.log[a] * (e % (self.order - 1))) % (self.order - 1)]
        return np.where(a == 0, np.where(e == 0, 1, 0), res)

    def frob_p(self, a, j):
        """x -> x^{p^j}; j may be negative."""
        a = np.asarray(a, dtype=np.int64)
        j %= self.k
        m = pow(self.p, j, self.order - 1)
        return np.where(a == 0, 0, self.exp[(self.log[a] * m) % (self.order - 1)])

    def frob(self, a, e):
        """x -> x^{q^e}; e may be negative (reduced modulo N)."""
        return self.frob_p(a, self.a * e)

    def scalar(self, c):
        """The image of the integer c in F_p inside K."""
        return int(c) % self.p

    def sum(self, arr, axis=None):
        arr = np.asarray(arr, dtype=np.int64)
        if self.p == 2:
            if axis is None:
                return np.bitwise_xor.reduce(arr.ravel())
            return np.bitwise_xor.reduce(arr, axis=axis)
        d = self.dig[arr].astype(np.int64)
        if axis is None:
            s = d.reshape(-1, self.k).sum(0) % self.p
        else:
            ax = axis if axis >= 0 else arr.ndim + axis
            s = d.sum(ax) % self.p
        return s @ self.pw

    def digits(self, a):
        return self.dig[np.asarray(a, dtype=np.int64)]

    def from_digits(self, d):
        return (np.asarray(d, dtype=np.int64) % self.p) @ self.pw

    # -- subfields -----------------------------------------------------------
    def check_subfield(self, m):
        if m < 1 or self.N % m:
            raise ParameterError(f"F_(q^{m}) is not a subfield of F_(q^{self.N})")

    def subfield_generator(self, m):
        self.check_subfield(m)
        return int(self.exp[(self.order - 1) // (self.q ** m - 1)])

    def subfield_elements(self, m):
        """All elements of F_{q^m}, zero first, then increasing powers of its generator."""
        self.check_subfield(m)
        step = (self.order - 1) // (self.q ** m - 1)
        return np.concatenate([[0], self.exp[np.arange(self.q ** m - 1) * step]]).astype(np.int64)

    def subfield_fp_basis(self, m):
        """An F_p-basis of F_{q^m}: powers of its multiplicative generator."""
        g = self.subfield_generator(m)
        return self.power(g, np.arange(self.a * m))

    def in_subfield(self, a, m):
        self.check_subfield(m)
        a = np.asarray(a, dtype=np.int64)
        return self.frob(a, m) == a

    def trace_to(self, x, m, n=None):
        """Tr_{F_{q^n}/F_{q^m}}(x) for x in F_{q^n}; n defaults to N."""
        n = self.N if n is None else n
        if n % m or self.N % n:
            raise ParameterError("need m | n | N")
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros_like(x)
        for i in range(n // m):
            acc = self.add(acc, self.frob(x, m * i))
        if not np.all(self.in_subfield(acc, m)):
            raise ConsistencyError("trace left the subfield (input not in F_(q^n)?)")
        return acc

    def norm_to(self, x, m, n=None):
        n = self.N if n is None else n
        if n % m or self.N % n:
            raise ParameterError("need m | n | N")
        x = np.asarray(x, dtype=np.int64)
        acc = np.ones_like(x)
        for i in range(n // m):
            acc = self.mul(acc, self.frob(x, m * i))
        if not np.all(self.in_subfield(acc, m)):
            raise ConsistencyError("norm left the subfield (input not in F_(q^n)?)")
        return acc

    def random(self, rng, size=None, m=None):
        """Uniform random elements of F_{q^m} (default: all of K)."""
        if m is None or m == self.N:
            return rng.integers(0, self.order, size=size, dtype=np.int64)
        els = self.subfield_elements(m)
        return els[rng.integers(0, len(els), size=size)]

    # -- F_p-linear structure ------------------------------------------------
    def mult_matrix(self, c):
        """k x k F_p-matrix of x -> c*x acting on digit columns."""
        basis = self.pw
        cols = self.dig[self.mul(c, basis)].astype(np.int64)
        return cols.T.copy()

    def frob_matrix(self, e):
        """k x k F_p-matrix of x -> x^{q^e}."""
        cols = self.dig[self.frob(self.pw, e)].astype(np.int64)
        return cols.T.copy()

    def elem(self, v):
        return FieldElem(self, v)


@functools.lru_cache(maxsize=32)
def get_tower(p, a=1, N=1):
    """Cached tower constructor (towers are immutable)."""
    return FieldTower(p, a, N)


class FieldElem:
    """A single element of a tower, with operator overloading."""

    __slots__ = ("tower", "val")

    def __init__(self, tower, val):
        self.tower = tower
        self.val = int(val)

    @property
    def coeffs(self):
        return [int(c) for c in self.tower.dig[self.val]]

    def _wrap(self, v):
        return FieldElem(self.tower, int(v))

    def _other(self, o):
        if isinstance(o, FieldElem):
            return o.val
        return self.tower.scalar(o)

    def __add__(self, o):
        return self._wrap(self.tower.add(self.val, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self.tower.sub(self.val, self._other(o)))

    def __rsub__(self, o):
        return self._wrap(self.tower.sub(self._other(o), self.val))

    def __neg__(self):
        return self._wrap(self.tower.neg(self.val))

    def __mul__(self, o):
        return self._wrap(self.tower.mul(self.val, self._other(o)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._wrap(self.tower.div(self.val, self._other(o)))

    def __pow__(self, e):
        return self._wrap(self.tower.power(self.val, e))

    def __eq__(self, o):
        if isinstance(o, FieldElem):
            return self.tower is o.tower and self.val == o.val
        return self.val == self.tower.scalar(o)

    def __hash__(self):
        return hash((id(self.tower), self.val))

    def __bool__(self):
        return self.val != 0

    def inverse(self):
        return self._wrap(self.tower.inv(self.val))

    def frobenius(self, e=1):
        return self._wrap(self.tower.frob(self.val, e))

    def __repr__(self):
        return f"FieldElem({self.val})"


def frobenius(x, e):
    """x^{q^e} for a FieldElem."""
    return x.frobenius(e)


def trace_to(x, m, n=None):
    return x._wrap(x.tower.trace_to(x.val, m, n))


def norm_to(x, m, n=None):
    return x._wrap(x.tower.norm_to(x.val, m, n))


# ---------------------------------------------------------------------------
# linear algebra over F_p (numpy int64 arrays)

def fp_rref(A, p):
    """Reduced row echelon form mod p; returns (R, pivot_columns)."""
    R = np.array(A, dtype=np.int64) % p
    rows, cols = R.shape
    pivots, r = [], 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + nz[0]
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        col = R[:, c].copy()
        col[r] = 0
        R = (R - np.outer(col, R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def fp_rank(A, p):
    return len(fp_rref(A, p)[1])


def fp_nullspace(A, p):
    """Rows spanning {x : A x = 0} over F_p."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    R, piv = fp_rref(A, p)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, pc in enumerate(piv):
            basis[t, pc] = (-R[r, f]) % p
    return basis


def fp_solve(A, b, p):
    """One solution x of A x = b mod p, or None."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    R, piv = fp_rref(np.hstack([A, b]), p)
    if A.shape[1] in piv:
        return None
    x = np.zeros(A.shape[1], dtype=np.int64)
    for r, pc in enumerate(piv):
        x[pc] = R[r, -1]
    return x


# ---------------------------------------------------------------------------
# matrices over K (2-D int arrays of field elements)

def mat_mul(F, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[-1] != B.shape[0]:
        raise ParameterError("shape mismatch")
    return F.sum(F.mul(A[:, :, None], B[None, :, :]), axis=1)


def mat_vec(F, A, v):
    return F.sum(F.mul(np.asarray(A), np.asarray(v)[None, :]), axis=1)


def identity(n):
    return np.eye(n, dtype=np.int64)


def row_reduce(F, M):
    """Reduced row echelon form over K; returns (R, pivot_columns)."""
    R = np.array(M, dtype=np.int64)
    rows, cols = R.shape
    pivots, r = [], 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + nz[0]
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] = F.mul(R[r], F.inv(R[r, c]))
        for j in range(rows):
            if j != r and R[j, c]:
                R[j] = F.sub(R[j], F.mul(R[j, c], R[r]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(F, M):
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(row_reduce(F, M)[1])


def det(F, M):
    M = np.array(M, dtype=np.int64)
    n, m = M.shape
    if n != m:
        raise ParameterError("det of a non-square matrix")
    d = 1
    for c in range(n):
        nz = np.nonzero(M[c:, c])[0]
        if len(nz) == 0:
            return 0
        i = c + nz[0]
        if i != c:
            M[[c, i]] = M[[i, c]]
            d = int(F.neg(d))
        piv = M[c, c]
        d = int(F.mul(d, piv))
        inv = F.inv(piv)
        for j in range(c + 1, n):
            if M[j, c]:
                M[j] = F.sub(M[j], F.mul(F.mul(M[j, c], inv), M[c]))
    return d


def inverse(F, M):
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    R, piv = row_reduce(F, np.hstack([M, identity(n)]))
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return R[:, n:]


def adjugate(F, M):
    """Classical adjoint; adj(M) M = det(M) I, also for singular M."""
    M = np.asarray(M, dtype=np.int64)
    n, m = M.shape
    if n != m:
        raise ParameterError("adjugate of a non-square matrix")
    if n == 1:
        return np.ones((1, 1), dtype=np.int64)
    d = det(F, M)
    if d:
        return F.mul(d, inverse(F, M))
    out = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, 0), j, 1)
            c = det(F, minor)
            if (i + j) % 2:
                c = int(F.neg(c))
            out[j, i] = c
    return out


def span_contains(F, target, generators):
    """True iff target lies in the K-span of the generators (rank test)."""
    target = np.asarray(target, dtype=np.int64)
    gens = np.asarray(generators, dtype=np.int64).reshape(-1, target.shape[0])
    r0 = rank(F, gens) if len(gens) else 0
    r1 = rank(F, np.vstack([gens, target[None, :]]))
    return r0 == r1


def batched_rank(F, Ms):
    """Ranks of a stack of matrices of shape (B, r, c) over K."""
    M = np.array(Ms, dtype=np.int64)
    B, r, c = M.shape
    rk = np.zeros(B, dtype=np.int64)
    rows = np.arange(r)
    for col in range(c):
        cand = (M[:, :, col] != 0) & (rows[None, :] >= rk[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        bi = np.nonzero(has)[0]
        piv = np.argmax(cand[bi], axis=1)
        tgt = rk[bi]
        tmp = M[bi, piv].copy()
        M[bi, piv] = M[bi, tgt]
        M[bi, tgt] = tmp
        prow = M[bi, tgt]  # (nb, c)
        pinv = F.inv(prow[:, col])
        factors = F.mul(M[bi, :, col], pinv[:, None])  # (nb, r)
        below = rows[None, :] > tgt[:, None]
        factors = np.where(below, factors, 0)
        M[bi] = F.sub(M[bi], F.mul(factors[:, :, None], prow[:, None, :]))
        rk[bi] += 1
    return rk


# ---------------------------------------------------------------------------
# semilinear systems  v^{(q^e)} = A v

def semilinear_fp_basis(F, A, e):
    """F_p-basis (rows of field vectors) of {v in K^D : v^{(q^e)} = A v}.

    The solution set is an F_{q^e}-space of dimension D when A is invertible
    and the ambient field is large enough; otherwise WidenField is raised.
    """
    A = np.asarray(A, dtype=np.int64)
    D = A.shape[0]
    if A.shape != (D, D):
        raise ParameterError("A must be square")
    if det(F, A) == 0:
        raise ParameterError("A must be invertible")
    k = F.k
    S = np.zeros((D * k, D * k), dtype=np.int64)
    Fr = F.frob_matrix(e)
    for i in range(D):
        for j in range(D):
            blk = (-F.mult_matrix(A[i, j])) % F.p
            if i == j:
                blk = (blk + Fr) % F.p
            S[i * k:(i + 1) * k, j * k:(j + 1) * k] = blk
    ker = fp_nullspace(S, F.p)
    expected = D * F.a * e
    if ker.shape[0] != expected:
        raise WidenField(
            f"solution space has F_p-dimension {ker.shape[0]}, expected {expected}; "
            "enlarge the ambient field")
    return ker.reshape(-1, D, k) @ F.pw


def solve_semilinear(F, A, s, n=1):
    """Basis over F_{q^{ns}} of the solutions of v^{(q^{ns})} = A v."""
    fpb = semilinear_fp_basis(F, A, n * s)
    D = fpb.shape[1]
    chosen = []
    for vec in fpb:
        trial = chosen + [vec]
        if rank(F, np.array(trial)) == len(trial):
            chosen.append(vec)
        if len(chosen) == D:
            break
    return np.array(chosen, dtype=np.int64)


def fp_span_chunk(F, basis, start, stop):
    """Elements of the F_p-span of ``basis`` (rows) indexed by start <= idx < stop.

    Index idx encodes the coefficient vector by its base-p digits.
    """
    basis = np.asarray(basis, dtype=np.int64)
    d = basis.shape[0]
    shape = basis.shape[1:]
    idx = np.arange(start, stop, dtype=np.int64)
    pw = F.p ** np.arange(d, dtype=np.int64)
    coef = (idx[:, None] // pw[None, :]) % F.p  # (P, d)
    bd = F.dig[basis.reshape(d, -1)].astype(np.int64)  # (d, E, k)
    E = bd.shape[1]
    vals = (coef @ bd.reshape(d, E * F.k)) % F.p
    return (vals.reshape(-1, E, F.k) @ F.pw).reshape((-1,) + shape)


def count_fp_span(F, basis):
    return F.p ** np.asarray(basis).shape[0]


def lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def embedding(Fs, Fb):
    """Field embedding F_s -> F_b as an int array indexed by elements of F_s.

    The image of the generator of F_s is the least root in F_b of its
    modulus; the map is then extended F_p-linearly on digit vectors.
    """
    if Fs.p != Fb.p or Fb.k % Fs.k:
        raise ParameterError("no embedding between these fields")
    cand = np.arange(Fb.order, dtype=np.int64)
    if Fs.k != Fb.k:
        step = (Fb.order - 1) // (Fs.order - 1)
        cand = np.concatenate([[0], Fb.exp[np.arange(0, Fb.order - 1, step)]])
    val = np.zeros_like(cand)
    xp = np.ones_like(cand)
    for c in Fs.modulus:
        val = Fb.add(val, Fb.mul(xp, c))
        xp = Fb.mul(xp, cand)
    roots = np.sort(cand[val == 0])
    if len(roots) == 0:
        raise ConsistencyError("modulus has no root in the larger field")
    alpha = int(roots[0])
    pows = Fb.power(np.full(Fs.k, alpha), np.arange(Fs.k))
    digs = Fs.dig.astype(np.int64)  # (|F_s|, k_s)
    out = np.zeros(Fs.order, dtype=np.int64)
    for i in range(Fs.k):
        out = Fb.add(out, Fb.mul(digs[:, i], pows[i]))
    if len(np.unique(out)) != Fs.order:
        raise ConsistencyError("embedding is not injective")
    return out


def embedding_inverse(emb, Fb):
    """Dense inverse of an embedding table (-1 off the image)."""
    inv = np.full(Fb.order, -1, dtype=np.int64)
    inv[emb] = np.arange(len(emb), dtype=np.int64)
    return inv


def fp_batched_rref(A, p):
    """Row reduction mod p of a stack (B, r, c); returns (R, ranks).

    Rows of each R span the same space as the input rows, nonzero rows first.
    """
    M = np.array(A, dtype=np.int64) % p
    B, r, c = M.shape
    rk = np.zeros(B, dtype=np.int64)
    rows = np.arange(r)
    inv_tab = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=np.int64)
    for col in range(c):
        cand = (M[:, :, col] != 0) & (rows[None, :] >= rk[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        bi = np.nonzero(has)[0]
        piv = np.argmax(cand[bi], axis=1)
        tgt = rk[bi]
        tmp = M[bi, piv].copy()
        M[bi, piv] = M[bi, tgt]
        M[bi, tgt] = tmp
        prow = (M[bi, tgt] * inv_tab[M[bi, tgt, col]][:, None]) % p
        M[bi, tgt] = prow
        factors = M[bi, :, col].copy()
        factors[np.arange(len(bi)), tgt] = 0
        M[bi] = (M[bi] - factors[:, :, None] * prow[:, None, :]) % p
        rk[bi] += 1
    return M, rk
