"""Point model of X_h, its level-one part X_h^1 and the Drinfeld strata.

A point is a column v of n Witt vectors, stored as an int array (n, h).
Components i = 1 mod n0 ("first" components) are full W_h vectors; the other
components are W_{h-1} vectors stored with a zero top level.  The matrix
lambda(v) has column [ie+1]_n equal to pi^{-floor(ik0/n0)} (b sigma)^i (v) with
b = b_cox.  Because b_cox is monomial, every entry of lambda(v) is a monomial
pi^s sigma^i(v_j); the table of (source, Frobenius power, shift) is computed
once per parameter set and checked for integrality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ffield
from .errors import BudgetError, ConsistencyError, ParameterError
from .parahoric import (GroupParams, coxeter_rep, enumerate_fixed, matw_det, matw_inv,
                        matw_mul, matw_vec, normalize, subgroup_pattern, torus_embed,
                        pattern_member)
from .witt import witt_mul


def point_mask(P):
    """Boolean (n, h) mask of the coordinates of the lattice model."""
    m = np.zeros((P.n, P.h), dtype=bool)
    for i in range(1, P.n + 1):
        m[i - 1, :P.h if P.is_first(i) else P.h - 1] = True
    return m


def point_coords(P):
    return [tuple(int(x) for x in c) for c in np.argwhere(point_mask(P))]


def first_indices(P):
    return [i for i in range(P.n) if P.is_first(i + 1)]


@dataclass(frozen=True)
class LambdaEntry:
    row: int
    col: int
    src: int
    power: int
    shift: int


@lru_cache(maxsize=None)
def lambda_table(P):
    """Monomial description of lambda(v): entry (row, col) = pi^shift sigma^power(v_src)."""
    dest, c = coxeter_rep(P)
    n = P.n
    out = []
    for j in range(n):
        pos, acc = j, 0
        for i in range(n):
            col = (i * P.e) % n
            shift = acc - (i * P.k0) // P.n0
            if shift < 0:
                raise ConsistencyError("lambda has a non-integral entry")
            row = pos
            if not P.is_first(j + 1) and shift == 0 and P.h >= 1:
                # an unknown top level of a W_{h-1} component must be killed
                if not P.br(row + 1) > P.br(col + 1):
                    raise ConsistencyError("lambda entry depends on the lift")
            if P.br(row + 1) < P.br(col + 1) and shift < 1:
                raise ConsistencyError("lambda violates the parahoric pattern")
            out.append(LambdaEntry(row, col, j, i, shift))
            acc += c[pos]
            pos = dest[pos]
    return tuple(out)


def lambda_matrix(F, P, V):
    """lambda(v) for V of shape (..., n, h); returns (..., n, n, h)."""
    V = np.asarray(V, dtype=np.int64)
    h = P.h
    out = np.zeros(V.shape[:-2] + (P.n, P.n, h), dtype=np.int64)
    frob_cache = {}
    for ent in lambda_table(P):
        key = (ent.src, ent.power)
        if key not in frob_cache:
            frob_cache[key] = F.frob(V[..., ent.src, :], ent.power)
        s = ent.shift
        if s < h:
            out[..., ent.row, ent.col, s:] = frob_cache[key][..., :h - s]
    return normalize(P, out)


def gb_matrix(F, P, V, which="cox"):
    """g_b(v): column i is pi^{floor((i-1)k0/n0)} (b sigma)^{i-1}(v), all in W_h.

    V is (..., n, h) with full W_h components (the appendix lattice, where the
    non-first components carry a zero constant term).
    """
    from .parahoric import special_rep
    dest, c = coxeter_rep(P) if which == "cox" else special_rep(P)
    V = np.asarray(V, dtype=np.int64)
    n, h = P.n, P.h
    out = np.zeros(V.shape[:-2] + (n, n, h), dtype=np.int64)
    cur = V.copy()
    for i in range(n):
        pre = (i * P.k0) // P.n0
        if pre < h:
            out[..., :, i, pre:] = cur[..., :, :h - pre]
        nxt = np.zeros_like(cur)
        fr = F.frob(cur, 1)
        for j in range(n):
            s = c[j]
            if s < h:
                nxt[..., dest[j], s:] = fr[..., j, :h - s]
        cur = nxt
    return out


def det_lambda(F, P, V):
    return matw_det(F, P, lambda_matrix(F, P, V))


def is_in_Xh(F, P, V):
    """det lambda(v) is a Witt unit fixed by sigma."""
    d = det_lambda(F, P, V)
    return (d[..., 0] != 0) & np.all(F.frob(d, 1) == d, axis=-1)


def residues(P, V):
    """Residue vector: level-0 coordinates of the first components, (..., n')."""
    V = np.asarray(V)
    return V[..., first_indices(P), 0]


def is_in_Xh1(F, P, V):
    V = np.asarray(V)
    vb = residues(P, V)
    target = np.zeros(P.nprime, dtype=np.int64)
    target[0] = 1
    return is_in_Xh(F, P, V) & np.all(vb == target, axis=-1)


def is_in_Y(F, P, V):
    """X_h cap T G^1: residue vector a nonzero multiple of e_1."""
    vb = residues(P, np.asarray(V))
    ok = (vb[..., 0] != 0) & np.all(vb[..., 1:] == 0, axis=-1)
    return is_in_Xh(F, P, V) & ok


# ---------------------------------------------------------------------------
# Drinfeld strata

def phi_map(F, P, W):
    """Phi = pi^{-k0}(b sigma)^{n0} on residue vectors of length n' (batched)."""
    W = np.asarray(W, dtype=np.int64)
    npr, e = P.nprime, P.e
    out = np.zeros_like(W)
    img = F.frob(W, P.n0)
    for u in range(npr):
        out[..., (u + e) % npr] = img[..., u]
    return out


def _check_phi_shift(P):
    dest, c = coxeter_rep(P)
    for j in first_indices(P):
        pos, acc = j, 0
        for _ in range(P.n0):
            acc += c[pos]
            pos = dest[pos]
        if acc != P.k0 or not P.is_first(pos + 1):
            raise ConsistencyError("Phi is not pi^{k0} times a first-component map")


def divisors(m):
    return [d for d in range(1, m + 1) if m % d == 0]


def stratum_labels(F, P, V=None, residues_in=None):
    """Largest r | n' with sigma^n(vbar) in Span{Phi^{jr} vbar : j < n'/r}.

    Also asserts that the set of admissible r is exactly the divisors of the
    label and that the Phi^r-Krylov space of vbar has dimension n'/r.
    """
    _check_phi_shift(P)
    vb = residues(P, V) if residues_in is None else np.asarray(residues_in, dtype=np.int64)
    npr = P.nprime
    B = vb.shape[0]
    if npr == 1:
        return np.ones(B, dtype=np.int64)
    powers = [vb]
    for _ in range(npr):
        powers.append(phi_map(F, P, powers[-1]))
    target = F.frob(vb, P.n)
    if not np.array_equal(powers[npr], target):
        raise ConsistencyError("Phi^{n'} differs from sigma^n on residues")
    ok = {}
    for r in divisors(npr):
        gens = np.stack([powers[j * r] for j in range(npr // r)], axis=1)
        r0 = ffield.batched_rank(F, gens)
        r1 = ffield.batched_rank(F, np.concatenate([gens, target[:, None, :]], axis=1))
        ok[r] = r0 == r1
    label = np.ones(B, dtype=np.int64)
    for r in divisors(npr):
        label = np.where(ok[r], np.maximum(label, r), label)
    for r in divisors(npr):
        expect = (label % r) == 0
        if not np.array_equal(expect, ok[r]):
            raise ConsistencyError("admissible r are not the divisors of the label")
    for r in divisors(npr):
        sel = label == r
        if sel.any():
            gens = np.stack([powers[i * r] if i * r <= npr else None for i in range(npr)
                             if i * r <= npr], axis=1)[sel]
            dims = ffield.batched_rank(F, gens)
            if np.any(dims != npr // r):
                raise ConsistencyError("Krylov dimension differs from n'/r")
    return label


# ---------------------------------------------------------------------------
# actions

def lattice_normalize(P, V):
    return np.where(point_mask(P), np.asarray(V, dtype=np.int64), 0)


def act(F, P, g=None, V=None, t=None):
    """Left translation by g in G_h and right multiplication by a Witt scalar t."""
    out = np.asarray(V, dtype=np.int64)
    if g is not None:
        out = lattice_normalize(P, matw_vec(F, g, out))
    if t is not None:
        t = np.asarray(t, dtype=np.int64)
        out = lattice_normalize(P, witt_mul(F, out, t[..., None, :]))
    return out


def teichmuller(P, z):
    z = np.asarray(z, dtype=np.int64)
    out = np.zeros(z.shape + (P.h,), dtype=np.int64)
    out[..., 0] = z
    return out


def act_gamma(F, P, zeta, g, t, V):
    """(zeta, g, t) * x = zeta (g x t) zeta^{-1} on the v-coordinates."""
    w = act(F, P, g, V, t)
    Z = torus_embed(F, P, teichmuller(P, zeta))
    w = lattice_normalize(P, matw_vec(F, Z, w))
    zinv = teichmuller(P, F.inv(zeta))
    return act(F, P, None, w, zinv)


def gamma_compose(F, P, a, b):
    """Group law: (z1, g1, t1)(z2, g2, t2) = (z1 z2, z2^{-1} g1 z2 g2, t1 t2)."""
    z1, g1, t1 = a
    z2, g2, t2 = b
    Z2 = torus_embed(F, P, teichmuller(P, z2))
    Z2i = torus_embed(F, P, teichmuller(P, F.inv(z2)))
    g = matw_mul(F, P, matw_mul(F, P, matw_mul(F, P, Z2i, g1), Z2), g2)
    return (int(F.mul(z1, z2)), g, witt_mul(F, t1, t2))


# ---------------------------------------------------------------------------
# enumeration

def _chunks(total, size):
    for s in range(0, total, size):
        yield s, min(total, s + size)


def enumerate_points(P, which="Xh1", M=1, budget=1 << 24, chunk=1 << 16, r=None):
    """All points over F_{q^{nM}} of X_h^1 ("Xh1"), X_h ("Xh"), Y ("Y") or a stratum.

    For which="stratum", r selects the points of X_h with label exactly r;
    which="closure" selects labels divisible by r (the closed piece X_h^{(r)}).
    Returns (points, labels).
    """
    F = P.tower(M)
    coords = point_coords(P)
    fixed = {}
    if which in ("Xh1", "Y"):
        for u, i in enumerate(first_indices(P)):
            fixed[(i, 0)] = 1 if u == 0 else 0
    free = [c for c in coords if c not in fixed]
    els = F.subfield_elements(M * P.n) if M * P.n != F.N else np.arange(F.order)
    if which == "Y":
        heads = els[1:]
    ne = len(els)
    total = ne ** len(free)
    if which == "Y":
        total = total * (ne - 1)
    if total > budget:
        raise BudgetError(f"{total} candidates exceed budget {budget}")
    pts, labs = [], []
    for s, e in _chunks(total, chunk):
        idx = np.arange(s, e, dtype=np.int64)
        V = np.zeros((e - s, P.n, P.h), dtype=np.int64)
        for (i, l), val in fixed.items():
            V[:, i, l] = val
        if which == "Y":
            V[:, 0, 0] = heads[idx % (ne - 1)]
            idx = idx // (ne - 1)
        for (i, l) in reversed(free):
            V[:, i, l] = els[idx % ne]
            idx = idx // ne
        if which == "Xh1":
            keep = is_in_Xh1(F, P, V)
        elif which == "Y":
            keep = is_in_Y(F, P, V)
        else:
            keep = is_in_Xh(F, P, V)
        V = V[keep]
        if len(V):
            lab = stratum_labels(F, P, V)
            if which == "stratum":
                V, lab = V[lab == r], lab[lab == r]
            elif which == "closure":
                V, lab = V[lab % r == 0], lab[lab % r == 0]
            pts.append(V)
            labs.append(lab)
    if not pts:
        return np.zeros((0, P.n, P.h), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(pts), np.concatenate(labs)


def stratum_histogram(labels):
    vals, counts = np.unique(np.asarray(labels), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def shp_decomposition_check(P, r, M=1, budget=1 << 22):
    """Every point of X_h^{(r)} is g.(point with lambda in L^{(r)} G^1) for one coset g.

    Only residues matter, so the check runs on the reductive quotient: for
    each point the set of g in G_1(F_q) with g^{-1} res(lambda(v)) in L^{(r)}
    must be exactly one left coset of L^{(r)}(F_q).
    """
    F = P.tower(M)
    P1 = GroupParams(P.p, P.a, P.n, P.kappa, 1)
    level = P.h
    try:
        pts, labs = enumerate_points(P, "closure", M=M, budget=budget, r=r)
    except BudgetError:
        # the check only sees residues, which are exactly the points of X_1
        level = 1
        P = P1
        pts, labs = enumerate_points(P, "closure", M=M, budget=budget, r=r)
    G1 = _group_h1(F, P1, "Gh")
    L1 = _group_h1(F, P1, "Lr", r)
    Lkeys = {x.tobytes() for x in L1[..., 0]}
    res = lambda_matrix(F, P, pts)[..., :1]
    Ginv = matw_inv(F, P1, G1)
    report = {"params": P.to_json(), "r": r, "M": M, "level": level, "points": int(len(pts)),
              "coset_size": int(len(L1)), "ok": True, "failures": 0}
    lpat = subgroup_pattern(P1, "Lr", r)
    for x in res:
        prod = matw_mul(F, P1, Ginv, x[None])
        good = pattern_member(P1, lpat, prod)
        S = G1[good]
        if len(S) != len(L1):
            report["ok"] = False
            report["failures"] += 1
            continue
        g0inv = matw_inv(F, P1, S[:1])
        rel = matw_mul(F, P1, g0inv, S)
        if not all(y.tobytes() in Lkeys for y in rel[..., 0]):
            report["ok"] = False
            report["failures"] += 1
    return report


def _group_h1(F, P1, which, r=None):
    pat = subgroup_pattern(P1, which, r)
    els = enumerate_fixed(F, P1, pat)
    d0 = matw_det(F, P1, els)[..., 0]
    return els[d0 != 0]


def count_points_formula(P):
    return P.q ** (P.n * P.n * (P.h - 1))


def count_Xh1(P, M=1, budget=1 << 24, chunk=1 << 14):
    """#X_h^1(F_{q^{nM}}) without enumerating the top-level coordinates.

    The top-level coordinates x of the first components enter det lambda(v)
    only at level h-1, and there F_p-linearly with a coefficient fixed by the
    residue vector e_1.  So det = d(y) + pi^{h-1} L(x) where y runs over the
    remaining coordinates, and for each admissible y the number of x with
    d_{h-1}(y) + L(x) in F_q is |ker L| times the number of those targets that
    lie in the image of L.
    """
    F = P.tower(M)
    coords = point_coords(P)
    firsts = first_indices(P)
    fixed = {(i, 0): (1 if u == 0 else 0) for u, i in enumerate(firsts)}
    top = [(i, P.h - 1) for i in firsts] if P.h > 1 else []
    ys = [c for c in coords if c not in fixed and c not in top]
    els = F.subfield_elements(M * P.n)
    ne = len(els)
    k = F.k
    # linear part L on the F_p-basis of the x-coordinates
    fpb = F.subfield_fp_basis(M * P.n)
    base = np.zeros((1, P.n, P.h), dtype=np.int64)
    for (i, l), val in fixed.items():
        base[0, i, l] = val
    d_base = det_lambda(F, P, base)[0, P.h - 1]
    cols = []
    for c in top:
        for b in fpb:
            V = base.copy()
            V[0, c[0], c[1]] = b
            cols.append(F.digits(F.sub(det_lambda(F, P, V)[0, P.h - 1], d_base)))
    Lmat = np.array(cols, dtype=np.int64).T % F.p if cols else np.zeros((k, 0), dtype=np.int64)
    rankL = ffield.fp_rank(Lmat, F.p) if cols else 0
    ker_size = F.p ** (Lmat.shape[1] - rankL)
    # z is in im L iff Q z = 0 for Q a basis of the left kernel of L
    Q = ffield.fp_nullspace(Lmat.T, F.p) if cols else np.eye(k, dtype=np.int64)
    Fq = F.subfield_elements(1)
    total = ne ** len(ys)
    if total > budget:
        raise BudgetError(f"{total} candidates exceed budget {budget}")
    count = 0
    for s, e in _chunks(total, chunk):
        idx = np.arange(s, e, dtype=np.int64)
        V = np.repeat(base, e - s, axis=0)
        for (i, l) in reversed(ys):
            V[:, i, l] = els[idx % ne]
            idx = idx // ne
        d = det_lambda(F, P, V)
        if P.h > 1:
            low_ok = (d[:, 0] != 0) & np.all(F.frob(d[:, :P.h - 1], 1) == d[:, :P.h - 1], axis=-1)
        else:
            low_ok = np.ones(len(V), dtype=bool)
        if P.h == 1:
            count += int(np.sum(low_ok & (F.frob(d[:, 0], 1) == d[:, 0])))
            continue
        tgt = F.sub(Fq[None, :], d[:, P.h - 1][:, None])  # (B, q)
        dig = F.digits(tgt).astype(np.int64)  # (B, q, k)
        inim = np.all((dig @ Q.T) % F.p == 0, axis=-1) if Q.size else np.ones(tgt.shape, bool)
        count += int(np.sum(np.where(low_ok, inim.sum(axis=1), 0))) * ker_size
    return count
