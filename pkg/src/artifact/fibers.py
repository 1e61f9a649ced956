"""Fibers of the projection X_h^+ -> X_{h-1}^+ and their normal form.

Everything runs in the lattice model with the special representative b_sp.
Only kappa = 0 is supported: there b_sp is the identity, every component is a
full W_h vector and g_b(v) = (v, sigma v, ..., sigma^{n-1} v).

A base point is an int array (n, h-1) holding the levels 0..h-2 of v, and the
top coordinates are the n values x_{i,h-1}.  The top coordinates enter the
level h-1 coefficient P0 of det g_b(v) through an additive ("linearised")
polynomial, stored here as a coefficient table ``coef[var, k]`` meaning
sum_var sum_k coef[var, k] * x_var^{q^k}, with k read modulo the degree D of
the point field F_{q^D} (x^{q^D} = x there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ffield
from .errors import BudgetError, ConsistencyError, ParameterError
from .parahoric import GroupParams, witt_det
from .variety import divisors, gb_matrix


def _require_split(P):
    if P.kappa != 0:
        raise ParameterError("the fiber normal form is implemented for kappa = 0 only")
    if P.h < 2:
        raise ParameterError("fibers need h >= 2")


def _base_params(P):
    return GroupParams(P.p, P.a, P.n, P.kappa, P.h - 1)


def full_vector(base, top):
    """Stack base levels (..., n, h-1) and top values (..., n) into (..., n, h)."""
    base = np.asarray(base, dtype=np.int64)
    top = np.asarray(top, dtype=np.int64)
    shape = np.broadcast_shapes(base.shape[:-1], top.shape)
    out = np.zeros(shape + (base.shape[-1] + 1,), dtype=np.int64)
    out[..., :-1] = base
    out[..., -1] = top
    return out


def det_gb(F, P, V):
    """det g_{b_sp}(v) as a Witt vector of length P.h, batched over V (..., n, h)."""
    return witt_det(F, gb_matrix(F, P, V, which="sp"))


# ---------------------------------------------------------------------------
# base points

def is_base_point(F, P, base):
    """base in X_{h-1}^+: det g_b is a sigma-fixed unit at levels 0..h-2."""
    Pb = _base_params(P)
    d = det_gb(F, Pb, base)
    return (d[..., 0] != 0) & np.all(F.frob(d, 1) == d, axis=-1)


def residue_matrix(F, base):
    """gbar = (xbar, sigma xbar, ..., sigma^{n-1} xbar) over K."""
    xb = np.asarray(base, dtype=np.int64)[..., 0]
    n = xb.shape[-1]
    return np.stack([F.frob(xb, j) for j in range(n)], axis=-1)


def spanning_coefficients(F, base):
    """y_0..y_{n-1} with sigma^n(xbar) = sum_i y_i sigma^i(xbar)."""
    g = residue_matrix(F, base)
    n = g.shape[0]
    if ffield.rank(F, g) < n:
        raise ConsistencyError("the vectors sigma^i(xbar) do not form a basis")
    target = F.frob(np.asarray(base)[:, 0], n)
    return ffield.mat_vec(F, ffield.inverse(F, g), target)


def base_label(F, P, base):
    """Stratum label: the gcd of n and the support of y (largest admissible r)."""
    y = spanning_coefficients(F, base)
    g = P.n
    for i, yi in enumerate(y):
        if yi:
            g = math.gcd(g, i)
    return g


def krylov_label(F, P, base):
    """Same label from ranks: largest r | n with rank{sigma^{jr} xbar} = n/r."""
    xb = np.asarray(base)[:, 0]
    best = 1
    for r in divisors(P.n):
        vecs = np.stack([F.frob(xb, j * r) for j in range(P.n)])
        if ffield.rank(F, vecs) == P.n // r:
            best = max(best, r)
    return best


def enumerate_bases(P, M=1, budget=1 << 22):
    """All points of X_{h-1}^+ over F_{q^{nM}}, as an array (B, n, h-1)."""
    _require_split(P)
    F = P.tower(M)
    Pb = _base_params(P)
    els = F.subfield_elements(F.N)
    ne = len(els)
    nc = P.n * Pb.h
    total = ne ** nc
    if total > budget:
        raise BudgetError(f"{total} base candidates exceed budget {budget}")
    idx = np.arange(total, dtype=np.int64)
    V = np.zeros((total, P.n, Pb.h), dtype=np.int64)
    for c in reversed(range(nc)):
        i, l = divmod(c, Pb.h)
        V[:, i, l] = els[idx % ne]
        idx //= ne
    keep = np.zeros(total, dtype=bool)
    for s in range(0, total, 1 << 14):
        keep[s:s + (1 << 14)] = is_base_point(F, P, V[s:s + (1 << 14)])
    return V[keep]


# ---------------------------------------------------------------------------
# linearised polynomials

def eval_linearised(F, coef, X):
    """Evaluate coef (nv, D) at points X (..., nv)."""
    coef = np.asarray(coef, dtype=np.int64)
    X = np.asarray(X, dtype=np.int64)
    acc = np.zeros(X.shape[:-1], dtype=np.int64)
    for v in range(coef.shape[0]):
        for k in np.nonzero(coef[v])[0]:
            acc = F.add(acc, F.mul(coef[v, k], F.frob(X[..., v], int(k))))
    return acc


def trace_form(D, length, shift=0):
    row = np.zeros(D, dtype=np.int64)
    for k in range(length):
        row[(k + shift) % D] = 1
    return row


def _apply_linear(F, coef, C):
    """coef in x with x = C x'; returns the table in x'."""
    n, D = coef.shape
    out = np.zeros((C.shape[1], D), dtype=np.int64)
    for k in range(D):
        Ck = F.frob(C, k)
        for l in range(C.shape[1]):
            out[l, k] = int(F.sum(F.mul(coef[:, k], Ck[:, l])))
    return out


# ---------------------------------------------------------------------------
# P0, c and P1

@dataclass
class P0Data:
    base: np.ndarray
    c: int
    d: int
    coef: np.ndarray
    residual: int


def p0_values(F, P, base, tops):
    """P0 (the level h-1 coefficient of det g_b) at the given top tuples (B, n)."""
    V = full_vector(base[None], np.asarray(tops, dtype=np.int64))
    return det_gb(F, P, V)[..., P.h - 1]


def p0_and_c(F, P, base, samples=None, seed=0):
    """c(x~) = P0(x~, 0) and the decomposition P0 = c + P1 (n0 = 1).

    P1 is read off from the adjugate (p1_poly); the identity is checked on
    every top tuple when there are at most 2^12 of them, otherwise on
    ``samples`` random ones.  ``residual`` counts the failures.
    """
    _require_split(P)
    base = np.asarray(base, dtype=np.int64)
    zero = np.zeros((1, P.n), dtype=np.int64)
    c = int(p0_values(F, P, base, zero)[0])
    coef = p1_poly(F, P, base)
    ne = F.q ** F.N
    if ne ** P.n <= 1 << 12 and samples is None:
        els = F.subfield_elements(F.N)
        grids = np.meshgrid(*([els] * P.n), indexing="ij")
        tops = np.stack([g.ravel() for g in grids], axis=-1)
    else:
        rng = np.random.default_rng(seed)
        tops = F.random(rng, size=(samples or 256, P.n))
    lhs = p0_values(F, P, base, tops)
    rhs = F.add(c, eval_linearised(F, coef, tops))
    d = int(det_gb(F, _base_params(P), base[None])[0, 0])
    return P0Data(base, c, d, coef, int(np.sum(lhs != rhs)))


def p1_poly(F, P, base):
    """Coefficient table of P1 = sum_{i,j} m_{ji} x_i^{q^{j-1}}, m = adj(gbar)."""
    _require_split(P)
    m = ffield.adjugate(F, residue_matrix(F, base))
    n, D = P.n, F.N
    coef = np.zeros((n, D), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            coef[i, j % D] = F.add(coef[i, j % D], m[j, i])
    return coef


# ---------------------------------------------------------------------------
# the matrix mu

def mast_matrix(F, P, base, method="recursion"):
    """mu = det(gbar)^{-1} times the matrix of (m*)' in the bases E and B_x.

    method="recursion" fills the grid column by column from the closed rules;
    method="definition" extracts the coefficients from iterated b sigma in
    the basis B_x.  Both use y_0 as computed (it equals (-1)^{n-1}).
    """
    _require_split(P)
    n = P.n
    y = spanning_coefficients(F, base)
    mu = np.zeros((n, n), dtype=np.int64)
    if method == "definition":
        A = np.zeros((n, n), dtype=np.int64)
        for i in range(1, n):
            A[i, i - 1] = 1
        A[:, n - 1] = y
        Pi = np.eye(n, dtype=np.int64)
        for i in range(n):
            mu[i] = F.frob(Pi[i], -i)
            Pi = ffield.mat_mul(F, A, F.frob(Pi, 1))
        return mu
    if method != "recursion":
        raise ParameterError(f"unknown method {method!r}")
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if j == 1:
                val = 1
            elif i + j <= n + 1:
                val = 0
            elif i + j == n + 2:
                val = int(F.frob(y[i - 1], -(i - 1)))
            else:
                prev = mu[i - 2, j - 1]
                other = int(F.frob(mu[n - 1, j + i - (n + 1) - 1], n - (i - 1)))
                val = int(F.add(prev, F.mul(F.frob(y[i - 1], -(i - 1)), other)))
            mu[i - 1, j - 1] = val
    return mu


# ---------------------------------------------------------------------------
# the coordinate change M_r

@dataclass
class Stage:
    kind: str          # "linear", "frob", "add" or "perm"
    data: dict
    note: str = ""


@dataclass
class NormalForm:
    base: np.ndarray
    label: int
    d: int
    c: int
    y: np.ndarray
    indices: list
    S: np.ndarray
    T: np.ndarray
    C: np.ndarray
    stages: list
    coef: np.ndarray
    g: int
    euclid: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.flags


def _solve_upper_column(F, mu, target, k):
    """s supported on rows 0..k with mu s = target and s[k] != 0, or None."""
    n = mu.shape[0]
    sub = mu[:, :k + 1]
    aug = np.hstack([sub, np.asarray(target, dtype=np.int64)[:, None]])
    R, piv = ffield.row_reduce(F, aug)
    if k + 1 in piv:
        return None
    s = np.zeros(k + 1, dtype=np.int64)
    for row, col in enumerate(piv):
        s[col] = R[row, k + 1]
    if s[k] == 0:
        # add a kernel vector whose k-th entry is nonzero
        if k in piv:
            return None
        kern = np.zeros(k + 1, dtype=np.int64)
        kern[k] = 1
        for row, col in enumerate(piv):
            kern[col] = F.neg(R[row, k])
        s = F.add(s, kern)
    out = np.zeros(n, dtype=np.int64)
    out[:k + 1] = s
    return out


def _target_pattern(n, indices):
    """Columns of mu S: ones in column 0, a run of ones in column n - i_j."""
    Y = np.zeros((n, n), dtype=np.int64)
    Y[:, 0] = 1
    ends = list(indices[1:]) + [n]
    for ij, nxt in zip(indices, ends):
        Y[ij:nxt, n - ij] = 1
    return Y


def _perm_T(n, indices):
    """Permutation matrix: row 0 -> col 0, row n - i_j -> col s+1-j, rest in order."""
    s = len(indices) - 1
    T = np.zeros((n, n), dtype=np.int64)
    T[0, 0] = 1
    used_r, used_c = {0}, {0}
    for j, ij in enumerate(indices):
        T[n - ij, s + 1 - j] = 1
        used_r.add(n - ij)
        used_c.add(s + 1 - j)
    free_c = [c for c in range(n) if c not in used_c]
    for rr, cc in zip([r for r in range(n) if r not in used_r], free_c):
        T[rr, cc] = 1
    return T


def _run(coef, D):
    """(lo, length) if the row is a run of ones modulo D, else None."""
    nz = [k for k in range(D) if coef[k]]
    if not nz:
        return (0, 0)
    if any(coef[k] != 1 for k in nz):
        return None
    L = len(nz)
    for lo in nz:
        if all(coef[(lo + t) % D] == 1 for t in range(L)):
            return (lo, L)
    return None


def build_Mr(F, P, base):
    """The coordinate change bringing the fiber over ``base`` to normal form.

    Stage 1 is the linear change x = C x' with C = gbar S T.  Then each block
    variable is Frobenius-shifted to start at q^0, and a Euclidean reduction
    on the block lengths (x_c -> x_c + x_d, then a q-power shift) leaves one
    variable W of length g = gcd.  Finally z1 = W + sum_j x1'^{q^{gj}},
    z2 = x1' and the remaining variables follow in order.
    """
    _require_split(P)
    base = np.asarray(base, dtype=np.int64)
    n, D = P.n, F.N
    pc = p0_and_c(F, P, base, samples=8)
    y = spanning_coefficients(F, base)
    label = base_label(F, P, base)
    indices = [i for i in range(1, n) if y[i]]
    flags = []
    mu = mast_matrix(F, P, base)
    Y = _target_pattern(n, indices)
    S = np.zeros((n, n), dtype=np.int64)
    for k in range(n):
        col = _solve_upper_column(F, mu, Y[:, k], k)
        if col is None:
            raise ConsistencyError(f"no upper triangular S column {k}")
        S[:, k] = col
    if S[0, 0] != 1 or np.any(np.tril(S, -1)) or np.any(np.diag(S) == 0):
        raise ConsistencyError("S is not upper triangular with unit corner")
    T = _perm_T(n, indices)
    N = ffield.mat_mul(F, S, T)
    C = ffield.mat_mul(F, residue_matrix(F, base), N)
    stages = [Stage("linear", {"C": C}, "x = C x'")]
    coef = _apply_linear(F, p1_poly(F, P, base), C)
    dinv = int(F.inv(pc.d))
    nf = F.mul(coef, dinv)

    expect0 = trace_form(D, n)
    if not np.array_equal(nf[0], expect0):
        flags.append("x1' does not carry the full trace form")
    # runs for the remaining variables
    runs = {}
    for v in range(1, n):
        run = _run(nf[v], D)
        if run is None:
            flags.append(f"variable {v} is not a run of q-powers")
            run = (0, 0)
        runs[v] = run
    # predicted runs: q^{i_j} .. q^{i_{j+1}-1} on variable s+1-j
    s = len(indices) - 1
    ends = indices[1:] + [n]
    for j, (ij, nxt) in enumerate(zip(indices, ends)):
        if runs.get(s + 1 - j) != (ij, nxt - ij):
            flags.append(f"block {j} differs from the predicted run")
    # shift every run to start at q^0
    for v, (lo, L) in runs.items():
        if L and lo:
            stages.append(Stage("frob", {"var": v, "e": -lo}, f"x{v} -> x{v}^(q^{lo})"))
            nf[v] = np.roll(nf[v], -lo)
    live = [v for v in range(1, n) if runs[v][1]]
    lengths = {v: runs[v][1] for v in live}
    euclid = []
    surv = live[0] if live else None
    for v in live[1:]:
        a, b = surv, v
        while lengths[a] and lengths[b]:
            if lengths[a] < lengths[b]:
                a, b = b, a
            # Tr_La(a) + Tr_Lb(b): b <- b + a, then a <- a^{q^Lb}
            La, Lb = lengths[a], lengths[b]
            stages.append(Stage("add", {"c": b, "d": a, "lam": 0}, f"x{b} -> x{b} + x{a}"))
            nf[a] = F.sub(nf[a], nf[b])
            stages.append(Stage("frob", {"var": a, "e": -Lb}, f"x{a} -> x{a}^(q^{Lb})"))
            nf[a] = np.roll(nf[a], -Lb)
            lengths[a] = La - Lb
            euclid.append((La, Lb))
        surv = a if lengths[a] else b
    g = lengths[surv] if surv is not None else n
    if g != label:
        flags.append(f"Euclidean gcd {g} differs from the stratum label {label}")
    order = list(range(n))
    if surv is not None:
        if n % g:
            flags.append("gcd does not divide n")
        for j in range(n // g if g else 0):
            stages.append(Stage("add", {"c": surv, "d": 0, "lam": g * j}, f"z1 += x1'^(q^{g * j})"))
            nf[0] = F.sub(nf[0], np.roll(nf[surv], g * j))
        order = [surv, 0] + [v for v in range(1, n) if v != surv]
    stages.append(Stage("perm", {"order": order}, "z_i = x'_{order[i]}"))
    nf = nf[order]
    expect = np.zeros((n, D), dtype=np.int64)
    expect[0] = trace_form(D, g)
    if not np.array_equal(nf, expect):
        flags.append("final form is not Tr_g(z1)")
    return NormalForm(base, label, pc.d, pc.c, y, indices, S, T, C, stages,
                      F.mul(nf, pc.d), g, euclid, flags)


def apply_stages(F, nf, tops):
    """Forward map top coordinates (B, n) -> z (B, n)."""
    X = np.asarray(tops, dtype=np.int64).copy()
    for st in nf.stages:
        if st.kind == "linear":
            Cinv = ffield.inverse(F, st.data["C"])
            X = F.sum(F.mul(Cinv[None, :, :], X[:, None, :]), axis=-1)
        elif st.kind == "frob":
            v = st.data["var"]
            X[:, v] = F.frob(X[:, v], -st.data["e"])
        elif st.kind == "add":
            c, d, lam = st.data["c"], st.data["d"], st.data["lam"]
            X[:, c] = F.add(X[:, c], F.frob(X[:, d], lam))
        elif st.kind == "perm":
            X = X[:, st.data["order"]]
    return X


# ---------------------------------------------------------------------------
# verification and census

def _all_tops(F, n, budget):
    els = F.subfield_elements(F.N)
    if len(els) ** n > budget:
        raise BudgetError(f"{len(els) ** n} top tuples exceed budget {budget}")
    grids = np.meshgrid(*([els] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def fiber_of(F, P, base, tops=None, budget=1 << 16):
    """Top tuples over F_{q^{nM}} lying over base, decided by P0^q = P0."""
    if tops is None:
        tops = _all_tops(F, P.n, budget)
    p0 = p0_values(F, P, base, tops)
    return tops[F.frob(p0, 1) == p0]


def verify_normal_form(P, M=1, bases=None, budget=1 << 16):
    """Check the normal form on every fiber point of every base point.

    For each base: the transformed points satisfy d (z1^{q^g} - z1) = c - c^q,
    the map on top tuples is injective and the fiber has exactly as many
    points as that hypersurface, and the action of 1 + pi^{h-1} a for every
    a in F_{q^n} is transported to z1 + Tr(a), z2 + a (when r < n) and
    trivial elsewhere.
    """
    _require_split(P)
    F = P.tower(M)
    if bases is None:
        bases = enumerate_bases(P, M)
    tops = _all_tops(F, P.n, budget)
    A = F.subfield_elements(P.n)
    rows = []
    for base in bases:
        nf = build_Mr(F, P, base)
        fib = fiber_of(F, P, base, tops)
        Z = apply_stages(F, nf, fib)
        z1 = Z[:, 0]
        lhs = F.mul(nf.d, F.sub(F.frob(z1, nf.g), z1))
        rhs = F.sub(nf.c, F.frob(nf.c, 1))
        eq_ok = bool(np.all(lhs == rhs))
        Zall = apply_stages(F, nf, tops)
        keys = np.unique(Zall, axis=0)
        injective = len(keys) == len(tops)
        els = F.subfield_elements(F.N)
        sols = int(np.sum(F.mul(nf.d, F.sub(F.frob(els, nf.g), els)) == rhs))
        count_ok = len(fib) == sols * len(els) ** (P.n - 1)
        xbar = base[:, 0]
        act_ok = True
        orbit_ok = True
        for a in A:
            moved = F.add(fib, F.mul(a, xbar)[None, :])
            Zm = apply_stages(F, nf, moved)
            exp = Z.copy()
            tr = F.trace_to(np.int64(a), nf.label, P.n) if P.n % nf.label == 0 else None
            exp[:, 0] = F.add(exp[:, 0], tr)
            if nf.label != P.n and P.n > 1:
                exp[:, 1] = F.add(exp[:, 1], a)
            if not np.array_equal(Zm, exp):
                act_ok = False
            size = len({int(F.mul(F.scalar(k), tr)) for k in range(F.p)})
            if size not in (1, F.p):
                orbit_ok = False
        rows.append({"label": nf.label, "g": nf.g, "fiber": int(len(fib)), "equation": eq_ok,
                     "injective": injective, "count": count_ok, "action": act_ok,
                     "orbit": orbit_ok, "flags": list(nf.flags)})
    ok = all(r["equation"] and r["injective"] and r["count"] and r["action"] and r["orbit"]
             and not r["flags"] for r in rows)
    return {"suite": "normal_form", "params": P.to_json(), "M": M, "bases": len(rows),
            "points": int(sum(r["fiber"] for r in rows)),
            "failures": [r for r in rows if not (r["equation"] and r["injective"] and r["count"]
                                                and r["action"] and r["orbit"] and not r["flags"])],
            "pass": ok}


def fiber_count(F, P, base):
    """#fiber over F_{q^{nM}} from the F_p-linear map top -> P1(top)."""
    pc = p0_and_c(F, P, base, samples=8)
    basis = F.subfield_fp_basis(F.N)
    cols = []
    for v in range(P.n):
        for b in basis:
            x = np.zeros((1, P.n), dtype=np.int64)
            x[0, v] = b
            cols.append(F.digits(eval_linearised(F, pc.coef, x))[0])
    L = np.array(cols, dtype=np.int64).T % F.p
    rk = ffield.fp_rank(L, F.p)
    ker = F.p ** (L.shape[1] - rk)
    Q = ffield.fp_nullspace(L.T, F.p)
    tg = F.sub(F.subfield_elements(1), pc.c)
    dig = F.digits(tg).astype(np.int64)
    inim = np.all((dig @ Q.T) % F.p == 0, axis=-1) if Q.size else np.ones(len(tg), bool)
    return int(inim.sum()) * ker


def fiber_census(P, M=1, brute=False, budget=1 << 22):
    """Fiber sizes over every base point, grouped by stratum label.

    Returns {"rows": [(base_id, r, count)], "by_stratum": {r: {size: bases}},
    "constant": bool, "total": int}.  With brute=True every top tuple is tested.
    """
    _require_split(P)
    F = P.tower(M)
    bases = enumerate_bases(P, M, budget=budget)
    rows = []
    for bid, base in enumerate(bases):
        r = base_label(F, P, base)
        cnt = len(fiber_of(F, P, base)) if brute else fiber_count(F, P, base)
        rows.append((bid, r, cnt))
    by = {}
    for _, r, cnt in rows:
        by.setdefault(r, {})
        by[r][cnt] = by[r].get(cnt, 0) + 1
    return {"params": P.to_json(), "M": M, "rows": rows, "by_stratum": by,
            "constant": all(len(v) == 1 for v in by.values()),
            "total": int(sum(c for _, _, c in rows))}


def census_csv(census):
    lines = ["base_id,stratum_r,fiber_count"]
    lines += [f"{b},{r},{c}" for b, r, c in census["rows"]]
    return "\n".join(lines) + "\n"


def count_Xh_plus(P, M=1, budget=1 << 22):
    """#X_h^+(F_{q^{nM}}) by testing every vector of W_h^n."""
    _require_split(P)
    F = P.tower(M)
    els = F.subfield_elements(F.N)
    nc = P.n * P.h
    total = len(els) ** nc
    if total > budget:
        raise BudgetError(f"{total} candidates exceed budget {budget}")
    count = 0
    for s in range(0, total, 1 << 14):
        idx = np.arange(s, min(total, s + (1 << 14)), dtype=np.int64)
        V = np.zeros((len(idx), P.n, P.h), dtype=np.int64)
        for c in reversed(range(nc)):
            i, l = divmod(c, P.h)
            V[:, i, l] = els[idx % len(els)]
            idx //= len(els)
        d = det_gb(F, P, V)
        count += int(np.sum((d[:, 0] != 0) & np.all(F.frob(d, 1) == d, axis=-1)))
    return count


def sample_bases(P, M, count, seed=0, tries=1 << 20):
    """Random base points of X_1^+ over F_{q^{nM}} (h = 2 only), by rejection."""
    _require_split(P)
    if P.h != 2:
        raise ParameterError("sample_bases draws residues only (h = 2)")
    F = P.tower(M)
    rng = np.random.default_rng(seed)
    found = []
    drawn = 0
    while sum(len(f) for f in found) < count and drawn < tries:
        V = F.random(rng, size=(1 << 14, P.n, 1))
        drawn += len(V)
        found.append(V[is_base_point(F, P, V)])
    out = np.concatenate(found)[:count]
    if len(out) < count:
        raise BudgetError("not enough base points found")
    return out


def check_on_samples(F, P, nf, samples=256, seed=0):
    """P0(x) = c + d Tr_g(z1(x)) and the action transport on random top tuples."""
    rng = np.random.default_rng(seed)
    tops = F.random(rng, size=(samples, P.n))
    Z = apply_stages(F, nf, tops)
    tr_g = np.zeros(samples, dtype=np.int64)
    for k in range(nf.g):
        tr_g = F.add(tr_g, F.frob(Z[:, 0], k))
    ident = bool(np.all(p0_values(F, P, nf.base, tops) == F.add(nf.c, F.mul(nf.d, tr_g))))
    act = True
    xbar = nf.base[:, 0]
    for a in F.random(rng, size=8, m=P.n):
        Zm = apply_stages(F, nf, F.add(tops, F.mul(a, xbar)[None, :]))
        exp = Z.copy()
        exp[:, 0] = F.add(exp[:, 0], F.trace_to(np.int64(a), nf.label, P.n))
        if nf.label != P.n:
            exp[:, 1] = F.add(exp[:, 1], a)
        act &= bool(np.array_equal(Zm, exp))
    return {"identity": ident, "action": act, "flags": list(nf.flags)}
