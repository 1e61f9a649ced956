"""Characters of W_h^x(F_{q^m}) and W_h^1(F_{q^m}), Howe data and degree formulas.

A unit group is presented polycyclically: a Teichmuller generator of
F_{q^m}^x and the elements 1 + pi^l b_k (l = 1..h-1, b_k an F_p-basis of
F_{q^m}).  Every element has unique "digit" exponents with respect to these
generators, the p-th powers give the relations, and a Smith normal form of the
relation matrix gives the invariant factors.

A character is stored by its values on the polycyclic generators, as exponents
c_j of a fixed root of unity zeta_L.  The modulus L is shared by all models of
one ambient field, so characters of different models can be compared and
multiplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import ffield
from .errors import BudgetError, ConsistencyError, ParameterError
from .witt import witt_mul


# ---------------------------------------------------------------------------
# integer Smith normal form

def smith_normal_form(A):
    """Return (D, U, V) with U A V = D diagonal, d_1 | d_2 | ..., all integer.

    U and V are unimodular; entries are Python ints (object arrays avoided by
    working on nested lists).
    """
    A = [[int(x) for x in row] for row in np.asarray(A)]
    m, n = len(A), len(A[0]) if A else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, i, j):
        M[i], M[j] = M[j], M[i]

    def swap_cols(M, i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]

    def add_row(M, src, dst, f):
        M[dst] = [a + f * b for a, b in zip(M[dst], M[src])]

    def add_col(M, src, dst, f):
        for row in M:
            row[dst] += f * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        swap_rows(A, t, i)
        swap_rows(U, t, i)
        swap_cols(A, t, j)
        swap_cols(V, t, j)
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    f = A[i][t] // A[t][t]
                    add_row(A, t, i, -f)
                    add_row(U, t, i, -f)
                    if A[i][t]:
                        swap_rows(A, t, i)
                        swap_rows(U, t, i)
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    f = A[t][j] // A[t][t]
                    add_col(A, t, j, -f)
                    add_col(V, t, j, -f)
                    if A[t][j]:
                        swap_cols(A, t, j)
                        swap_cols(V, t, j)
                        done = False
            if done:
                # enforce divisibility of the rest of the block
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % A[t][t]:
                            add_row(A, i, t, 1)
                            add_row(U, i, t, 1)
                            done = False
                            break
                    if not done:
                        break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return A, U, V


def int_matrix_inverse(V):
    """Inverse of a unimodular integer matrix (exact, via fractions-free adjugate)."""
    from fractions import Fraction
    n = len(V)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(V)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [x / pv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    out = [[M[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise ConsistencyError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


# ---------------------------------------------------------------------------
# cyclotomic integers

@lru_cache(maxsize=None)
def cyclotomic_poly(m):
    """Coefficients (low degree first) of the m-th cyclotomic polynomial."""
    num = np.zeros(m + 1, dtype=object)
    num[0], num[m] = -1, 1
    poly = [int(x) for x in num]
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_exact_div(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


def _poly_exact_div(a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = a[i + len(b) - 1] // b[-1]
        out[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    if any(a):
        raise ConsistencyError("inexact polynomial division")
    return out


def cyclo_reduce(vec, m):
    """Reduce a Z[x]/(x^m - 1) coefficient vector modulo Phi_m."""
    a = [int(x) for x in vec]
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    for i in range(len(a) - 1, deg - 1, -1):
        c = a[i]
        if c:
            for j, pj in enumerate(phi):
                a[i - deg + j] -= c * pj
    return tuple(a[:deg])


def cyclo_from_exponents(exps, m, weights=None):
    """Sum of w * zeta_m^e as a length-m count vector."""
    exps = np.asarray(exps, dtype=np.int64) % m
    w = np.ones_like(exps) if weights is None else np.asarray(weights, dtype=np.int64)
    return np.bincount(exps.ravel(), weights=w.ravel(), minlength=m).astype(np.int64)


def cyclo_mul(a, b, m):
    """Product of two length-m count vectors in Z[x]/(x^m - 1)."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    out = np.zeros(m, dtype=object)
    for i in np.nonzero(a)[0]:
        out += a[i] * np.roll(b, int(i))
    return out


def cyclo_conj(a, m):
    a = np.asarray(a)
    return np.concatenate([a[:1], a[1:][::-1]])


def cyclo_as_integer(vec, m):
    """The integer value of a cyclotomic integer, or None if it is not rational."""
    red = cyclo_reduce(vec, m)
    if any(red[1:]):
        return None
    return red[0] if red else 0


# ---------------------------------------------------------------------------
# unit group models

def witt_pow(F, x, e):
    """x^e in W_h for e >= 0 by square-and-multiply (batched)."""
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    out[..., 0] = 1
    base = x
    while e:
        if e & 1:
            out = witt_mul(F, out, base)
        base = witt_mul(F, base, base)
        e >>= 1
    return out


def master_modulus(F, h):
    """A common exponent for every unit group W_{h'}^x(F_{q^m}) with m | N, h' <= h."""
    c = 0
    while F.p ** c < h:
        c += 1
    return ffield.lcm((F.q ** F.N - 1) * F.p ** c, F.p)


def absolute_trace(F, x):
    """Tr_{K/F_p}(x) as an integer in [0, p)."""
    x = np.asarray(x, dtype=np.int64)
    acc = np.zeros_like(x)
    for i in range(F.k):
        acc = F.add(acc, F.frob_p(x, i))
    return acc


class UnitModel:
    """W_h^x(F_{q^m}) (or W_h^1(F_{q^m}) when level1) inside the tower F."""

    def __init__(self, F, m, h, level1=False, L=None):
        F.check_subfield(m)
        self.F, self.m, self.h, self.level1 = F, m, h, level1
        self.Q = F.q ** m
        self.L = master_modulus(F, h) if L is None else L
        self.step = (F.order - 1) // (self.Q - 1)
        basis = F.subfield_fp_basis(m)
        self.basis = np.asarray(basis, dtype=np.int64)
        self.dim = len(self.basis)
        self._coord_setup()
        gens, levels = [], []
        if not level1:
            g = np.zeros(h, dtype=np.int64)
            g[0] = F.subfield_generator(m)
            gens.append(g)
            levels.append(0)
        for l in range(1, h):
            for b in self.basis:
                g = np.zeros(h, dtype=np.int64)
                g[0], g[l] = 1, b
                gens.append(g)
                levels.append(l)
        self.gens = np.array(gens, dtype=np.int64).reshape(-1, h)
        self.levels = np.array(levels, dtype=np.int64)
        self.N = len(self.gens)
        self._invpow = {}
        for t in range(self.N):
            if self.levels[t] > 0:
                inv = self._inverse(self.gens[t])
                self._invpow[t] = np.stack([witt_pow(F, inv, d) for d in range(F.p)])
        self._build_relations()

    # -- digit coordinates ------------------------------------------------
    def _coord_setup(self):
        F = self.F
        B = F.digits(self.basis).T.astype(np.int64) % F.p  # (k, dim)
        piv_rows = []
        rank = 0
        for r in range(B.shape[0]):
            trial = B[piv_rows + [r]]
            if ffield.fp_rank(trial, F.p) > rank:
                piv_rows.append(r)
                rank += 1
            if rank == B.shape[1]:
                break
        sub = B[piv_rows]
        inv = np.zeros_like(sub)
        for j in range(sub.shape[0]):
            e = np.zeros(sub.shape[0], dtype=np.int64)
            e[j] = 1
            inv[:, j] = ffield.fp_solve(sub, e, F.p)
        self._piv_rows = piv_rows
        self._sub_inv = inv

    def basis_coords(self, c):
        """F_p-coordinates of elements of F_{q^m} in ``self.basis``."""
        d = self.F.digits(np.asarray(c, dtype=np.int64)).astype(np.int64)
        return (d[..., self._piv_rows] @ self._sub_inv.T) % self.F.p

    def _inverse(self, x):
        from .witt import witt_inv
        return witt_inv(self.F, x)

    def coords(self, X):
        """Polycyclic exponents of units X (..., h) -> (..., N)."""
        F = self.F
        X = np.asarray(X, dtype=np.int64)
        if np.any(X[..., 0] == 0):
            raise ParameterError("not a unit")
        out = np.zeros(X.shape[:-1] + (self.N,), dtype=np.int64)
        col = 0
        if not self.level1:
            lg = F.log[X[..., 0]]
            if np.any(lg % self.step):
                raise ParameterError("element not in the subfield")
            out[..., 0] = lg // self.step
            u = F.mul(X, F.inv(X[..., 0])[..., None])
            col = 1
        else:
            if np.any(X[..., 0] != 1):
                raise ParameterError("not a level-one unit")
            u = X
        for l in range(1, self.h):
            cf = self.basis_coords(u[..., l])
            for kk in range(self.dim):
                t = col + kk
                out[..., t] = cf[..., kk]
                u = witt_mul(F, u, self._invpow[t][cf[..., kk]])
            col += self.dim
        if np.any(u[..., 1:]) or np.any(u[..., 0] != 1):
            raise ConsistencyError("digit decomposition did not terminate at 1")
        return out

    def _build_relations(self):
        N = self.N
        R = np.zeros((N, N), dtype=np.int64)
        for t in range(N):
            if self.levels[t] == 0:
                R[t, t] = self.Q - 1
            else:
                pw = witt_pow(self.F, self.gens[t], self.F.p)
                R[t] = -self.coords(pw)
                R[t, t] += self.F.p
        D, U, V = smith_normal_form(R)
        self.relations = R
        self.orders = np.array([D[i][i] for i in range(N)], dtype=np.int64)
        self.V = V
        self.Vinv = int_matrix_inverse(V)
        if int(np.prod([int(x) for x in self.orders])) != self.order_formula():
            raise ConsistencyError("Smith normal form disagrees with the group order")
        if self.L % int(max(self.orders.max(), 1)):
            raise ConsistencyError("master modulus is not a multiple of the exponent")
        self.exponent = int(ffield.lcm(*[int(x) for x in self.orders]))

    def order_formula(self):
        base = 1 if self.level1 else self.Q - 1
        return base * self.Q ** (self.h - 1)

    @property
    def order(self):
        return self.order_formula()

    def invariant_factors(self):
        return [int(x) for x in self.orders if x > 1]

    # -- elements ---------------------------------------------------------
    def elements(self, budget=1 << 20):
        if self.order > budget:
            raise BudgetError("unit group too large to list")
        els = self.F.subfield_elements(self.m)
        heads = np.array([1]) if self.level1 else els[1:]
        total = self.order
        idx = np.arange(total, dtype=np.int64)
        out = np.zeros((total, self.h), dtype=np.int64)
        out[:, 0] = heads[idx % len(heads)]
        idx //= len(heads)
        for l in range(1, self.h):
            out[:, l] = els[idx % len(els)]
            idx //= len(els)
        return out

    def level_mask(self, j):
        """Generators lying in U^j (j = 0 means the whole group)."""
        return self.levels >= j

    def galois_images(self, k):
        """Coordinates of sigma^k applied to the generators, (N, N)."""
        return self.coords(self.F.frob(self.gens, k))

    # -- characters -------------------------------------------------------
    def character(self, c):
        return Character(self, np.asarray(c, dtype=np.int64) % self.L)

    def trivial(self):
        return self.character(np.zeros(self.N, dtype=np.int64))

    def all_character_values(self, budget=1 << 20):
        """(count, N) array of generator values of every character."""
        if self.order > budget:
            raise BudgetError("dual group too large")
        grids = [np.arange(int(d)) * (self.L // int(d)) for d in self.orders]
        W = np.array(np.meshgrid(*grids, indexing="ij")).reshape(self.N, -1).T
        V = np.array(self.V, dtype=object)
        C = (W.astype(object) @ V.T) % self.L
        return C.astype(np.int64)

    def characters(self, budget=1 << 20):
        return [self.character(c) for c in self.all_character_values(budget)]

    def random_character(self, rng):
        w = np.array([int(rng.integers(int(d))) * (self.L // int(d)) for d in self.orders],
                     dtype=object)
        return self.character((np.array(self.V, dtype=object) @ w) % self.L)

    def check_character(self, c):
        """c respects every relation of the presentation."""
        return bool(np.all((self.relations @ np.asarray(c, dtype=np.int64)) % self.L == 0))


@lru_cache(maxsize=None)
def get_model(p, a, N, m, h, level1=False, L=None):
    """Cached model; L defaults to the master modulus of level h.

    Models whose characters are compared must share L, so derived models
    (factors, restrictions) are built with the L of their parent.
    """
    F = ffield.get_tower(p, a, N)
    return UnitModel(F, m, h, level1, L=master_modulus(F, max(h, 1)) if L is None else L)


def model_for(P, level1=False, m=None, h=None):
    """Unit model of T_h(F_q) = W_h^x(F_{q^n}) (or T_h^1) for group parameters P."""
    return get_model(P.p, P.a, P.n, P.n if m is None else m, P.h if h is None else h,
                     level1)


@dataclass
class Character:
    model: UnitModel
    c: np.ndarray

    def __call__(self, X):
        """Exponents e (mod L) with value zeta_L^e at the units X."""
        E = self.model.coords(X)
        return (E @ self.c) % self.model.L

    def values_on(self, E):
        return (np.asarray(E, dtype=np.int64) @ self.c) % self.model.L

    def __mul__(self, other):
        self._compat(other)
        return Character(self.model, (self.c + other.c) % self.model.L)

    def inverse(self):
        return Character(self.model, (-self.c) % self.model.L)

    def __eq__(self, other):
        return (isinstance(other, Character) and other.model is self.model
                and bool(np.array_equal(self.c, other.c)))

    def __hash__(self):
        return hash(tuple(self.c.tolist()))

    def _compat(self, other):
        if other.model is not self.model:
            raise ParameterError("characters of different models")

    def key(self):
        return tuple(int(x) for x in self.c)

    def is_trivial(self):
        return not np.any(self.c)

    def trivial_on(self, j):
        return not np.any(self.c[self.model.level_mask(j)])

    def depth(self):
        """Largest j >= 0 with theta nontrivial on U^j; -1 for the trivial character."""
        nz = self.model.levels[self.c != 0]
        return int(nz.max()) if len(nz) else -1

    def galois_twist(self, k):
        """theta^gamma with gamma = sigma^k: x -> theta(sigma^k x)."""
        G = self.model.galois_images(k)
        return Character(self.model, (G @ self.c) % self.model.L)

    def stabilizer_degree(self, j=0):
        """Divisor s of m with Gal-stabilizer of theta|U^j equal to Gal(F_{q^m}/F_{q^s})."""
        mask = self.model.level_mask(j)
        for s in divisors(self.model.m):
            G = self.model.galois_images(s)
            diff = ((G - np.eye(self.model.N, dtype=np.int64)) @ self.c) % self.model.L
            if not np.any(diff[mask]):
                return s
        raise ConsistencyError("sigma^m does not fix the character")

    def restrict_level1(self):
        """Restriction to W_h^1 as a character of the level-one model."""
        M = self.model
        sub = get_model(M.F.p, M.F.a, M.F.N, M.m, M.h, True, M.L)
        if M.level1:
            return self
        return Character(sub, self.c[M.levels > 0] % sub.L)


def divisors(m):
    return [d for d in range(1, m + 1) if m % d == 0]


# ---------------------------------------------------------------------------
# additive parameters

def psi(F, x):
    """Canonical additive character exponent: x -> Tr_{K/F_p}(x) in Z/p."""
    return absolute_trace(F, x)


def beta_levels(theta):
    """beta_j (j = 2..h) with theta(1 + pi^{j-1} x) = psi(Tr(beta_j x)).

    beta_j is only defined where x -> 1 + pi^{j-1} x is additive modulo the
    kernel of theta, i.e. when 2(j-1) >= h or theta is trivial on U^j; other
    entries are None.  Returns a dict {j: beta_j or None}.
    """
    M = theta.model
    F = M.F
    out = {}
    basis = M.basis
    T = np.array([[int(absolute_trace(F, F.mul(bi, bj))) for bj in basis] for bi in basis])
    for j in range(2, M.h + 1):
        if not (2 * (j - 1) >= M.h or theta.trivial_on(j)):
            out[j] = None
            continue
        X = np.zeros((len(basis), M.h), dtype=np.int64)
        X[:, 0] = 1
        X[:, j - 1] = basis
        vals = theta(X)
        if np.any(vals % (M.L // F.p)):
            raise ConsistencyError("level character is not of order p")
        v = (vals // (M.L // F.p)) % F.p
        coef = ffield.fp_solve(T, v, F.p)
        if coef is None:
            raise ConsistencyError("trace form is degenerate")
        out[j] = int(F.sum(F.mul(np.asarray(coef, dtype=np.int64) % F.p, basis)))
    return out


# ---------------------------------------------------------------------------
# Howe factorizations

@dataclass
class HoweData:
    d: int
    dprime: int
    m_seq: list
    h_seq: list
    factors: list = field(default_factory=list)
    jumps: list = field(default_factory=list)

    def to_json(self):
        return {"d": self.d, "dprime": self.dprime, "m_seq": self.m_seq, "h_seq": self.h_seq}


def stabilizer_profile(theta):
    """m(j) for j = 0..h-1 (j = 0 skipped for level-one models)."""
    M = theta.model
    start = 1 if M.level1 else 0
    return {j: theta.stabilizer_degree(j) for j in range(start, M.h)}


def howe_invariants(theta):
    """Invariant sequences of theta (or of a character of W_h^1).

    The first factor sits at the top nontrivial level h_1 = depth + 1 with
    m_1 = m(h_1 - 1); further factors appear exactly where the stabilizer
    degree m(j) strictly increases as j decreases.  For a character of the
    whole unit group the level-zero (depth zero) step is included, so a
    final factor with h_d = 1 may occur.  Returns (jumps, m_seq, h_seq) where
    jumps lists (m_i, h_i, j*_i) with j*_i the lowest level where m(j) = m_i.
    """
    M = theta.model
    n, h = M.m, M.h
    prof = stabilizer_profile(theta)
    lowest = min(prof)
    D = theta.depth()
    jumps = []
    if D < 1:
        if M.level1:
            return [], [1, n], [h, 1]
        jumps.append((prof[0], 1, 0))
    else:
        cur = prof[D]
        jl = D
        entries = [(cur, D + 1)]
        for j in range(D - 1, lowest - 1, -1):
            if prof[j] > cur:
                entries.append((prof[j], j + 1))
                cur = prof[j]
        # lowest level with the same stabilizer degree
        for mi, hi in entries:
            js = min(j for j in prof if j <= hi - 1 and prof[j] == mi)
            jumps.append((mi, hi, js))
    m_seq = [1] + [x[0] for x in jumps] + [n]
    h_seq = [h] + [x[1] for x in jumps] + [1]
    return jumps, m_seq, h_seq


def _check_sequences(m_seq, h_seq):
    d = len(m_seq) - 2
    if m_seq[0] != 1 or h_seq[-1] != 1:
        raise ConsistencyError("bad endpoints")
    for i in range(d + 1):
        if m_seq[i + 1] % m_seq[i]:
            raise ConsistencyError("m_i does not divide m_{i+1}")
    for i in range(1, d):
        if not m_seq[i] < m_seq[i + 1]:
            raise ConsistencyError("m sequence not strictly increasing")
        if not h_seq[i] > h_seq[i + 1]:
            raise ConsistencyError("h sequence not strictly decreasing")


def norm_map(F, X, m, n):
    """Nm_{F_{q^n}/F_{q^m}} on W_h vectors: product of sigma^{mi}(X), i < n/m."""
    X = np.asarray(X, dtype=np.int64)
    out = X
    for i in range(1, n // m):
        out = witt_mul(F, out, F.frob(X, m * i))
    return out


def norm_preimage(F, target, m, n, level):
    """y in U^level(F_{q^n}) with Nm(y) = target, for target in U^level(F_{q^m})."""
    target = np.asarray(target, dtype=np.int64)
    h = target.shape[-1]
    # u with Tr_{n/m}(u) = 1
    els = F.subfield_elements(n)
    tr = F.trace_to(els, m, n)
    u = int(els[np.nonzero(tr == 1)[0][0]])
    y = np.zeros(h, dtype=np.int64)
    y[0] = 1
    for l in range(level, h):
        cur = norm_map(F, y, m, n)
        from .witt import witt_inv
        err = witt_mul(F, target, witt_inv(F, cur))
        if np.any(err[1:l]) or err[0] != 1:
            raise ConsistencyError("norm lifting lost track of the level")
        corr = np.zeros(h, dtype=np.int64)
        corr[0], corr[l] = 1, F.mul(err[l], u)
        y = witt_mul(F, y, corr)
    if not np.array_equal(norm_map(F, y, m, n), target):
        raise ConsistencyError("norm preimage failed")
    return y


def pull_back(theta0, big, n):
    """pr^* Nm^* theta0 as a character of the model ``big`` (field F_{q^n})."""
    small = theta0.model
    F = big.F
    gens = big.gens
    img = norm_map(F, gens, small.m, n)[:, :small.h]
    if small.level1:
        img = img.copy()
    return big.character(theta0(img) % big.L)


def is_primitive(theta0):
    """Trivial Galois stabilizer on the top filtration step (on F^x when h = 1)."""
    M = theta0.model
    if M.h == 1:
        return theta0.stabilizer_degree(0) == M.m
    return theta0.stabilizer_degree(M.h - 1) == M.m and not theta0.trivial_on(M.h - 1)


def howe_factorize(theta, rng=None, budget=1 << 18):
    """Howe data of theta with explicit factors theta_i = pr^* Nm^* theta_i^0.

    Factor choices are randomized through ``rng``; the invariant sequences
    must not depend on them.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    M = theta.model
    F, n = M.F, M.m
    jumps, m_seq, h_seq = howe_invariants(theta)
    _check_sequences(m_seq, h_seq)
    d = len(jumps)
    factors = []
    rho = theta
    for (mi, hi, js) in jumps:
        small = get_model(F.p, F.a, F.N, mi, hi, M.level1, M.L)
        # values of rho on U^{js}(F_{q^{mi}}) through norm preimages
        sel = np.nonzero(small.levels >= js)[0]
        targets = []
        for t in sel:
            g = small.gens[t]
            if small.levels[t] == 0:
                # Teichmuller generator: lift through the norm on F^x
                els = F.subfield_elements(n)
                nm = F.norm_to(els[1:], mi, n)
                pre = int(els[1:][np.nonzero(nm == g[0])[0][0]])
                y = np.zeros(M.h, dtype=np.int64)
                y[0] = pre
            else:
                tg = np.zeros(M.h, dtype=np.int64)
                tg[:hi] = g
                y = norm_preimage(F, tg, mi, n, int(small.levels[t]))
            targets.append(int(rho(y[None])[0]))
        targets = np.array(targets, dtype=np.int64)
        cand = small.all_character_values(budget)
        ok = np.all((cand[:, sel] - targets[None, :]) % M.L == 0, axis=1)
        if not ok.any():
            raise ConsistencyError("no extension of the restricted character")
        pick = rng.choice(np.nonzero(ok)[0])
        theta0 = small.character(cand[pick])
        if not is_primitive(theta0):
            raise ConsistencyError(f"factor at (m, h) = ({mi}, {hi}) is not primitive")
        ti = pull_back(theta0, M, n)
        factors.append((theta0, ti))
        rho = rho * ti.inverse()
    if not rho.is_trivial():
        raise ConsistencyError("product of Howe factors differs from theta")
    dprime = d - 1 if (d and h_seq[d] == 1) else d
    return HoweData(d, dprime, m_seq, h_seq, factors, jumps)


def restrict_to_T1(theta, rng=None):
    """(chi, HoweData of chi): trim the depth-zero factor and recompute from chi."""
    hd = howe_factorize(theta, rng)
    chi = theta.restrict_level1()
    dp = hd.dprime
    trimmed_m = hd.m_seq[:dp + 1] + [chi.model.m]
    trimmed_h = hd.h_seq[:dp + 1] + [1]
    _, m2, h2 = howe_invariants(chi)
    if (m2, h2) != (trimmed_m, trimmed_h):
        raise ConsistencyError(f"chi invariants {m2, h2} differ from trimmed {trimmed_m, trimmed_h}")
    return chi, HoweData(dp, dp, trimmed_m, trimmed_h)


def chi_invariants(chi):
    """HoweData of a character of W_h^1 (d = d' since there is no depth zero)."""
    jumps, m_seq, h_seq = howe_invariants(chi)
    _check_sequences(m_seq, h_seq)
    d = len(jumps)
    return HoweData(d, d, m_seq, h_seq, [], jumps)


# ---------------------------------------------------------------------------
# degree formulas

def _lcm(a, b):
    return a * b // math.gcd(a, b)


def stepwise_terms(hd, n, n0):
    """Lists e_0..e_{d'} and f_0..f_{d'-1} from the invariant sequences of chi."""
    m, hh, dp = hd.m_seq, hd.h_seq, hd.dprime
    e = []
    for t in range(dp):
        e.append((n // m[t] - 1) * (hh[t] - hh[t + 1]))
    e.append((n // m[dp] - 1) * (hh[dp] - 1) - (n // _lcm(m[dp], n0) - 1))
    f = []
    for t in range(dp):
        f.append((n // m[t] - n // m[t + 1]) * (hh[t + 1] - 1)
                 - (n // _lcm(m[t], n0) - n // _lcm(m[t + 1], n0)))
    return e, f


def degree_r_chi(hd, n, n0):
    """(r_chi, e_chi, f_chi) with r = 2(n'-1) + 2e + f.

    e_chi is checked against its closed form; f_chi is the sum of the
    per-step contributions (see the decisions ledger for the sign of the
    (n - n/m_{d'}) term).
    """
    nprime = n // n0
    m, hh, dp = hd.m_seq, hd.h_seq, hd.dprime
    e_list, f_list = stepwise_terms(hd, n, n0)
    e = sum(e_list)
    f = sum(f_list)
    closed_e = ((n // m[dp] - 1) * (hh[dp] - 1) - (n // _lcm(m[dp], n0) - 1)
                - (hh[0] - hh[dp]) + sum(n // m[t] * (hh[t] - hh[t + 1]) for t in range(dp)))
    if closed_e != e:
        raise ConsistencyError("e_chi closed form disagrees with its steps")
    closed_f = (-(n - n // m[dp]) - (nprime - n // _lcm(m[dp], n0))
                + sum((n // m[t] - n // m[t + 1]) * hh[t + 1] for t in range(dp)))
    if closed_f != f:
        raise ConsistencyError("f_chi closed form disagrees with its steps")
    r = 2 * (nprime - 1) + 2 * e + f
    return r, e, f


def f_chi_displayed(hd, n, n0):
    """f_chi with a plus sign on the (n - n/m_{d'}) term, kept for comparison."""
    nprime = n // n0
    m, hh, dp = hd.m_seq, hd.h_seq, hd.dprime
    return ((n - n // m[dp]) - (nprime - n // _lcm(m[dp], n0))
            + sum((n // m[t] - n // m[t + 1]) * hh[t + 1] for t in range(dp)))


def prounip_degree(hd, n, n0):
    """Simplified degree for chi with m_{d'} = n."""
    m, hh, dp = hd.m_seq, hd.h_seq, hd.dprime
    if m[dp] != n:
        raise ParameterError("requires trivial Galois stabilizer (m_{d'} = n)")
    nprime = n // n0
    h = hh[0]
    return (n * (h - hh[1]) + h * (n - 2) + hh[dp] - (n - nprime)
            + sum(n // m[t] * (hh[t] - hh[t + 1]) for t in range(1, dp)))


def dim_exponent(hd, n, n0, h):
    r, _, _ = degree_r_chi(hd, n, n0)
    if (n * r) % 2:
        raise ConsistencyError(f"n * r_chi = {n * r} is odd")
    return (n * n - n) * (h - 1) - n * r // 2


def dim_formula(hd, n, n0, q, h):
    """q^{(n^2-n)(h-1) - n r_chi/2}; with m_{d'} = n also via the simplified degree."""
    ex = dim_exponent(hd, n, n0, h)
    if ex < 0:
        raise ConsistencyError("negative dimension exponent")
    if hd.m_seq[hd.dprime] == n:
        r2 = prounip_degree(hd, n, n0)
        if (n * n - n) * (h - 1) - n * r2 // 2 != ex:
            raise ConsistencyError("simplified degree disagrees")
    return q ** ex


def character_table_csv(model, chars, budget=1 << 12):
    """CSV text: one row per element (polycyclic exponents), one column per character."""
    els = model.elements(budget)
    E = model.coords(els)
    lines = ["element," + ",".join(f"chi{i}" for i in range(len(chars)))]
    for row, x in zip(E, els):
        vals = [str(int((row @ ch.c) % model.L)) for ch in chars]
        lines.append(" ".join(str(int(v)) for v in row) + "," + ",".join(vals))
    return "\n".join(lines) + "\n"
