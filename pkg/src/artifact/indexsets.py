"""Normed index sets of triples (i, j, l) coordinatizing the level-one group.

A triple (i, j, l) labels the pi^l coefficient of the (i, j) entry of a
matrix in G_h^1.  Sets are materialized as sorted lists of tuples; all
indices i, j are 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ParameterError


def bracket(x, m):
    """Representative of x mod m in {1, ..., m}."""
    return (x - 1) % m + 1


def norm(lam, n):
    i, j, l = lam
    return i - j + n * l


def dual(lam, h):
    i, j, l = lam
    return (j, i, h - 1 - l)


def _window(i, j, n0, h):
    """Allowed l for entry (i, j) of G_h^1 (i = j included)."""
    bi, bj = bracket(i, n0), bracket(j, n0)
    if bi > bj:
        return range(0, h - 1)
    return range(1, h)


def in_A_plus(lam, n, n0, h):
    i, j, l = lam
    return 1 <= i <= n and 1 <= j <= n and l in _window(i, j, n0, h)


def A_plus(n, n0, h):
    return [(i, j, l) for i in range(1, n + 1) for j in range(1, n + 1)
            for l in _window(i, j, n0, h)]


def A_set(n, n0, h):
    return [lam for lam in A_plus(n, n0, h) if lam[0] != lam[1]]


def A_minus(n, n0, h):
    return [lam for lam in A_set(n, n0, h) if lam[1] == 1]


def A_min(n, n0, h):
    """Triples whose dual (relative to h) is again in A."""
    A = set(A_set(n, n0, h))
    return sorted(lam for lam in A if dual(lam, h) in A)


def A_min_explicit(n, n0, h):
    out = []
    for (i, j, l) in A_set(n, n0, h):
        bi, bj = bracket(i, n0), bracket(j, n0)
        lo, hi = (0, h - 2) if bi > bj else ((1, h - 1) if bi < bj else (1, h - 2))
        if lo <= l <= hi:
            out.append((i, j, l))
    return sorted(out)


@dataclass(frozen=True)
class Sequences:
    """Invariant sequences m_0 | m_1 | ... | m_{d'+1} = n and h_0 >= ... > h_{d'+1} = 1."""
    n: int
    n0: int
    m: tuple
    h: tuple

    def __post_init__(self):
        m, h, n = self.m, self.h, self.n
        if len(m) != len(h) or len(m) < 2:
            raise ParameterError("sequences must have equal length >= 2")
        if m[-1] != n or h[-1] != 1:
            raise ParameterError("sequences must end with (n, 1)")
        if n % self.n0:
            raise ParameterError("n0 must divide n")
        for a, b in zip(m, m[1:]):
            if a < 1 or b % a:
                raise ParameterError("each m_i must divide m_{i+1}")
        dp = self.dprime
        for t in range(1, dp):
            if not m[t] < m[t + 1]:
                raise ParameterError("m_1 < ... < m_{d'} must increase strictly")
        if h[0] < h[1]:
            raise ParameterError("h_0 >= h_1 required")
        for t in range(1, dp + 1):
            if not h[t] > h[t + 1]:
                raise ParameterError("h_1 > ... > h_{d'+1} = 1 must decrease strictly")

    @property
    def dprime(self):
        return len(self.m) - 2

    @property
    def nprime(self):
        return self.n // self.n0

    def to_json(self):
        return {"n": self.n, "n0": self.n0, "m": list(self.m), "h": list(self.h)}


def A_st(seq, s, t):
    n, n0, m, hh = seq.n, seq.n0, seq.m, seq.h
    ms, ms1 = m[s], m[s + 1]
    return sorted((i, j, l) for (i, j, l) in A_set(n, n0, hh[0])
                  if (i - j) % ms == 0 and (i - j) % ms1 != 0 and l <= hh[t] - 1)


def A_st_minus(seq, s, t):
    return [lam for lam in A_st(seq, s, t) if lam[1] == 1]


def A_st_min(seq, s, t):
    """{lam in A_{s,t} : lam^vee in A_{s,t}} with the dual taken relative to h_t."""
    S = set(A_st(seq, s, t))
    ht = seq.h[t]
    return sorted(lam for lam in S if dual(lam, ht) in S)


def A_st_min_explicit(seq, s, t):
    n, n0, ht = seq.n, seq.n0, seq.h[t]
    out = []
    for (i, j, l) in A_st(seq, s, t):
        bi, bj = bracket(i, n0), bracket(j, n0)
        lo, hi = (0, ht - 2) if bi > bj else ((1, ht - 1) if bi < bj else (1, ht - 2))
        if lo <= l <= hi:
            out.append((i, j, l))
    return out


def A_st_minus_min(seq, s, t):
    return [lam for lam in A_st_min(seq, s, t) if lam[1] == 1]


def A_geq_min(seq, nu, t):
    """Disjoint union of A_{s,t}^min over ceil(nu) <= s <= d'."""
    out = []
    for s in range(max(0, math.ceil(nu)), seq.dprime + 1):
        out.extend(A_st_min(seq, s, t))
    return sorted(out)


def A_geq_minus_min(seq, nu, t):
    return [lam for lam in A_geq_min(seq, nu, t) if lam[1] == 1]


def I_st(seq, s, t):
    n, ht = seq.n, seq.h[t]
    return [lam for lam in A_st_minus_min(seq, s, t) if 2 * norm(lam, n) > n * (ht - 1)]


def J_st(seq, s, t):
    n, ht = seq.n, seq.h[t]
    return [lam for lam in A_st_minus_min(seq, s, t) if 2 * norm(lam, n) <= n * (ht - 1)]


SETS = ("A+", "A", "A-", "A_st", "A_st-", "A_min", "A_st_min", "A_geq_min", "I_st", "J_st")


def build_set(which, n=None, n0=1, h=None, seq=None, s=0, t=0, nu=0):
    if which == "A+":
        return A_plus(n, n0, h)
    if which == "A":
        return A_set(n, n0, h)
    if which == "A-":
        return A_minus(n, n0, h)
    if which == "A_min":
        return A_min(n, n0, h)
    if seq is None:
        raise ParameterError(f"{which} needs sequences")
    if which == "A_st":
        return A_st(seq, s, t)
    if which == "A_st-":
        return A_st_minus(seq, s, t)
    if which == "A_st_min":
        return A_st_min(seq, s, t)
    if which == "A_geq_min":
        return A_geq_min(seq, nu, t)
    if which == "I_st":
        return I_st(seq, s, t)
    if which == "J_st":
        return J_st(seq, s, t)
    raise ParameterError(f"unknown set {which}")


# ---------------------------------------------------------------------------
# the I -> J injection

def ij_map(lam, n, ht):
    i, _, l = lam
    return (bracket(n - i + 2, n), 1, ht - 2 - l)


def ij_injection(seq, s, t):
    """The map I_{s,t} -> J_{s,t} with its properties checked."""
    n, ht = seq.n, seq.h[t]
    I, J = I_st(seq, s, t), J_st(seq, s, t)
    Jset = set(J)
    mapping = {lam: ij_map(lam, n, ht) for lam in I}
    images = list(mapping.values())
    well_defined = all(im in Jset for im in images)
    injective = len(set(images)) == len(images)
    norm_sum = all(norm(a, n) + norm(b, n) == n * (ht - 1) for a, b in mapping.items())
    order_rev = all((norm(a, n) < norm(b, n)) == (norm(mapping[a], n) > norm(mapping[b], n))
                    for a in I for b in I if a != b)
    bijective = well_defined and injective and len(images) == len(J)
    total = len(I) + len(J)
    mid = ((n + 2) // 2, 1, (ht - 2) // 2) if (n % 2 == 0 and ht % 2 == 0) else None
    return {"map": mapping, "well_defined": well_defined, "injective": injective,
            "norm_sum": norm_sum, "order_reversing": order_rev, "bijective": bijective,
            "size_even": total % 2 == 0, "midpoint": mid,
            "midpoint_in_set": mid is not None and mid in Jset}


# ---------------------------------------------------------------------------
# closed forms

def _lcm(a, b):
    return a * b // math.gcd(a, b)


def cardinalities(seq):
    """Enumerated e_t (t <= d') and f_t (t < d')."""
    dp = seq.dprime
    e, f = [], []
    for t in range(dp + 1):
        a = set(A_geq_minus_min(seq, t, t))
        b = set(A_geq_minus_min(seq, t, t + 1))
        if not b <= a:
            raise ParameterError("filtration is not nested")
        e.append(len(a - b))
    for t in range(dp):
        f.append(len([lam for lam in A_st_min(seq, t, t + 1) if lam[1] == 1]))
    return e, f


def closed_form_cards(seq):
    n, n0, m, hh = seq.n, seq.n0, seq.m, seq.h
    dp = seq.dprime
    e = [(n // m[t] - 1) * (hh[t] - hh[t + 1]) for t in range(dp)]
    e.append((n // m[dp] - 1) * (hh[dp] - 1) - (n // _lcm(m[dp], n0) - 1))
    f = [(n // m[t] - n // m[t + 1]) * (hh[t + 1] - 1)
         - (n // _lcm(m[t], n0) - n // _lcm(m[t + 1], n0)) for t in range(dp)]
    return e, f


def complement_count(n, n0, h):
    """#(A^- minus A^{-,min})."""
    Am = set(A_minus(n, n0, h))
    Amin = {lam for lam in A_min(n, n0, h) if lam[1] == 1}
    return len(Am - Amin)


def random_sequences(rng, nmax=12):
    """A random valid pair of sequences with n <= nmax."""
    n = int(rng.integers(1, nmax + 1))
    divs = [d for d in range(1, n + 1) if n % d == 0]
    n0 = int(rng.choice(divs))
    chain = [int(rng.choice(divs))]
    while rng.random() < 0.6:
        nxt = [d for d in divs if d % chain[-1] == 0 and d > chain[-1]]
        if not nxt:
            break
        chain.append(int(rng.choice(nxt)))
    m0 = int(rng.choice([d for d in divs if chain[0] % d == 0]))
    dp = len(chain)
    hs = sorted(rng.choice(np.arange(2, dp + 8), size=dp, replace=False).tolist(), reverse=True)
    h0 = hs[0] + int(rng.integers(0, 3))
    return Sequences(n, n0, (m0,) + tuple(chain) + (n,), (h0,) + tuple(int(x) for x in hs) + (1,))


# ---------------------------------------------------------------------------
# symbolic determinant scan

def generic_entries(n, n0, h, hp):
    """Entries of the generic G_h^1 matrix as pi-series truncated at pi^{hp}.

    Each entry is a list over pi-degree of lists of (coefficient, variables),
    where variables is a tuple of triples; the diagonal carries the constant 1.
    """
    ent = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            series = [[] for _ in range(hp)]
            if i == j:
                series[0].append((1, ()))
            for l in _window(i, j, n0, h):
                if l < hp:
                    series[l].append((1, ((i, j, l),)))
            ent[(i, j)] = series
    return ent


def _series_mul(a, b, hp):
    out = [dict() for _ in range(hp)]
    for da, ta in enumerate(a):
        for db, tb in enumerate(b):
            if da + db >= hp:
                continue
            for ca, va in ta:
                for cb, vb in tb:
                    key = tuple(sorted(va + vb))
                    out[da + db][key] = out[da + db].get(key, 0) + ca * cb
    return [[(c, k) for k, c in d.items() if c] for d in out]


def symbolic_det(n, n0, h, hp, budget=1 << 20):
    """pi-coefficients of det (dict monomial -> integer coefficient per degree)."""
    if math.factorial(n) * (h ** n) > budget:
        raise BudgetError("symbolic expansion too large")
    ent = generic_entries(n, n0, h, hp)
    total = [dict() for _ in range(hp)]
    for perm in itertools.permutations(range(1, n + 1)):
        sign = 1
        for a in range(n):
            for b in range(a + 1, n):
                if perm[a] > perm[b]:
                    sign = -sign
        prod = [[(1, ())]] + [[] for _ in range(hp - 1)]
        for i in range(1, n + 1):
            prod = _series_mul(prod, ent[(i, perm[i - 1])], hp)
        for d in range(hp):
            for c, k in prod[d]:
                total[d][k] = total[d].get(k, 0) + sign * c
    return [{k: c for k, c in d.items() if c} for d in total]


def det_contribution_scan(n, hp, n0=1, h=None):
    """Check the norm bound and the duality of extremal pairs at pi^{hp-1}."""
    h = hp if h is None else h
    if hp > h:
        raise ParameterError("h' must not exceed h")
    coeffs = symbolic_det(n, n0, h, hp)
    top = coeffs[hp - 1]
    bound = n * (hp - 1)
    violations, non_dual, diagonal_extremal, extremal = [], [], [], 0
    equal_sum_ok = True
    for mono in top:
        # diagonal-only bookkeeping: the monomial's norms sum to n * (hp - 1)
        if sum(norm(lam, n) for lam in mono) != bound:
            equal_sum_ok = False
        for a, b in itertools.combinations(mono, 2):
            sm = norm(a, n) + norm(b, n)
            if sm > bound:
                violations.append((a, b))
            elif sm == bound:
                if a[0] == a[1] or b[0] == b[1]:
                    # diagonal variables reach the bound through the identity
                    # permutation; duality is only claimed for triples in A
                    diagonal_extremal.append((a, b))
                    continue
                extremal += 1
                if b != dual(a, hp):
                    non_dual.append((a, b))
    return {"n": n, "n0": n0, "h": h, "hp": hp, "monomials": len(top),
            "violations": violations, "extremal_pairs": extremal, "non_dual": non_dual,
            "diagonal_extremal": diagonal_extremal,
            "equal_sum": equal_sum_ok,
            "pass": not violations and not non_dual and equal_sum_ok}
