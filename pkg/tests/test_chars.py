import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import chars
from artifact.parahoric import GroupParams
from artifact.witt import witt_mul


def model(q, n, h, level1=False, kappa=0):
    return chars.model_for(GroupParams.from_q(q, n, kappa, h), level1=level1)


def test_smith_normal_form_textbook():
    A = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    D, U, V = chars.smith_normal_form(A)
    assert [D[i][i] for i in range(3)] == [2, 6, 12]
    prod = np.array(U) @ np.array(A) @ np.array(V)
    assert prod.tolist() == D
    Vi = chars.int_matrix_inverse(V)
    assert (np.array(V) @ np.array(Vi)).tolist() == np.eye(3, dtype=int).tolist()


@pytest.mark.parametrize("q,n,h,factors", [
    # 1 + pi F_2[[pi]] truncated: (1 + pi) has order 4 when h = 3 and h = 4
    (2, 1, 3, [4]),
    (2, 1, 4, [2, 4]),
    # F_3: 1 + pi has order 3, W_2^x(F_3) = F_3^x x (1 + pi F_3)
    (3, 1, 2, [2, 3]),
])
def test_invariant_factors_small(q, n, h, factors):
    M = model(q, n, h, level1=(q == 2))
    got = sorted(M.invariant_factors())
    prod = int(np.prod(got))
    assert prod == M.order
    # compare as abelian groups through the elementary divisors
    def elementary(fs):
        out = []
        for f in fs:
            for p in (2, 3, 5, 7):
                k = 1
                while f % p == 0:
                    f //= p
                    k *= p
                if k > 1:
                    out.append(k)
        return sorted(out)
    assert elementary(got) == elementary(factors)


@pytest.mark.parametrize("q,n,h", [(2, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 2), (4, 1, 3)])
def test_orders_and_character_count(q, n, h):
    M = model(q, n, h)
    assert M.order == (q ** n - 1) * q ** (n * (h - 1))
    assert len(M.elements()) == M.order
    allc = M.characters()
    assert len({c.key() for c in allc}) == M.order
    M1 = model(q, n, h, level1=True)
    assert M1.order == q ** (n * (h - 1))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(2, 2, 3), (3, 2, 2), (2, 3, 2)]), st.integers(0, 2 ** 31))
def test_characters_are_homomorphisms(case, seed):
    M = model(*case)
    rng = np.random.default_rng(seed)
    els = M.elements()
    x, y = els[rng.integers(len(els), size=30)], els[rng.integers(len(els), size=30)]
    th = M.random_character(rng)
    assert M.check_character(th.c)
    assert np.array_equal(th(witt_mul(M.F, x, y)), (th(x) + th(y)) % M.L)
    # Galois twists are characters as well
    tw = th.galois_twist(1)
    assert np.array_equal(tw(x), th(M.F.frob(x, 1)))


def test_column_orthogonality():
    M = model(3, 2, 2)
    els = M.elements()
    for th in M.characters()[:20]:
        vec = chars.cyclo_from_exponents(th(els), M.L)
        red = chars.cyclo_reduce(vec, M.L)
        expected = len(els) if th.is_trivial() else 0
        assert chars.cyclo_as_integer(red, M.L) == expected


def test_cyclotomic_arithmetic():
    assert chars.cyclotomic_poly(6) == (1, -1, 1)
    assert chars.cyclotomic_poly(12) == (1, 0, -1, 0, 1)
    # the sum of all 12th roots of unity is zero
    assert chars.cyclo_as_integer(np.ones(12, dtype=np.int64), 12) == 0
    # zeta + zeta^{-1} for a primitive 4th root is 0
    assert chars.cyclo_as_integer(chars.cyclo_from_exponents([1, 3], 4), 4) == 0
    a = chars.cyclo_from_exponents([1], 5)
    assert chars.cyclo_as_integer(chars.cyclo_mul(a, chars.cyclo_conj(a, 5), 5), 5) == 1


def test_depth_and_stabilizers():
    M = model(2, 2, 3)
    triv = M.trivial()
    assert triv.depth() == -1 and triv.stabilizer_degree(0) == 1
    for th in M.characters():
        D = th.depth()
        assert th.trivial_on(D + 1)
        prof = chars.stabilizer_profile(th)
        # stabilizer degrees grow as the level decreases
        assert all(prof[j] >= prof[j + 1] for j in range(M.h - 1))


# W_2^x(F_4) = F_4^x x (1 + pi F_4): theta = (order 3 part) x psi(Tr(beta x)).
# psi(Tr(beta x)) is Galois fixed iff beta lies in F_2, and every nontrivial
# character of F_4^x is moved by Frobenius.  Counting by hand:
#   trivial                                  -> [1,1,2], [2,1,1]       1
#   depth zero only                          -> [1,2,2], [2,1,1]       2
#   beta outside F_2 (any depth zero part)   -> [1,2,2], [2,2,1]   2 x 3
#   beta = 1, trivial depth zero part        -> [1,1,2], [2,2,1]       1
#   beta = 1, nontrivial depth zero part     -> [1,1,2,2], [2,2,1,1]   2
HOWE_FROZEN = {
    (2, 2, 2): {((1, 1, 2), (2, 1, 1)): 1, ((1, 2, 2), (2, 1, 1)): 2,
                ((1, 2, 2), (2, 2, 1)): 6, ((1, 1, 2), (2, 2, 1)): 1,
                ((1, 1, 2, 2), (2, 2, 1, 1)): 2},
}


def _howe_counter(q, n, h):
    M = model(q, n, h)
    out = {}
    for th in M.characters():
        hd = chars.howe_factorize(th)
        key = (tuple(hd.m_seq), tuple(hd.h_seq))
        out[key] = out.get(key, 0) + 1
    return out


def test_howe_table_frozen():
    assert _howe_counter(2, 2, 2) == HOWE_FROZEN[(2, 2, 2)]


def test_howe_examples_by_hand():
    M = model(2, 2, 2)
    hd = chars.howe_factorize(M.trivial())
    assert (hd.m_seq, hd.h_seq, hd.d) == ([1, 1, 2], [2, 1, 1], 1)
    for th in M.characters():
        if th.depth() == 1 and th.stabilizer_degree(1) == 2:
            hd = chars.howe_factorize(th)
            assert (hd.m_seq, hd.h_seq) == ([1, 2, 2], [2, 2, 1])


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_howe_factors_multiply_back(seed):
    M = model(3, 2, 2)
    rng = np.random.default_rng(seed)
    th = M.random_character(rng)
    hd = chars.howe_factorize(th, rng)
    prod = M.trivial()
    for theta0, pulled in hd.factors:
        assert chars.is_primitive(theta0)
        prod = prod * pulled
    assert prod == th


def test_chi_degrees_frozen():
    P = GroupParams.from_q(2, 2, 0, 2)
    M1 = chars.model_for(P, level1=True)
    rows = []
    for chi in M1.characters():
        hd = chars.chi_invariants(chi)
        r, e, f = chars.degree_r_chi(hd, P.n, P.n0)
        rows.append((r, chars.dim_formula(hd, P.n, P.n0, P.q, P.h)))
    # four characters, every one in degree n' = 2; the count 16 = 4 * 1 * q^2 forces dim 1
    assert rows == [(2, 1)] * 4
    assert sum(d * P.q ** (P.n * r // 2) for r, d in rows) == 16


def test_displayed_f_chi_differs_from_stepwise():
    P = GroupParams.from_q(2, 3, 0, 2)
    M1 = chars.model_for(P, level1=True)
    diffs = 0
    for chi in M1.characters():
        hd = chars.chi_invariants(chi)
        _, _, f = chars.degree_r_chi(hd, P.n, P.n0)
        diffs += f != chars.f_chi_displayed(hd, P.n, P.n0)
    assert diffs > 0


def test_restrict_to_T1_drops_depth_zero_factor():
    M = model(3, 2, 2)
    rng = np.random.default_rng(7)
    for th in M.characters()[::9]:
        chi, hd = chars.restrict_to_T1(th, rng)
        assert chi.model.level1
        assert hd.m_seq[-1] == 2 and hd.h_seq[-1] == 1


def test_beta_levels_domain():
    M = model(2, 2, 3)
    for th in M.characters()[:40]:
        b = chars.beta_levels(th)
        assert set(b) == {2, 3}
        # j = 3 is always additive; j = 2 only when theta is trivial on U^2
        assert b[3] is not None
        assert (b[2] is None) == (not th.trivial_on(2))


def test_character_table_csv_shape():
    M = model(2, 1, 3, level1=True)
    allc = M.characters()
    text = chars.character_table_csv(M, allc)
    lines = text.strip().splitlines()
    assert len(lines) == M.order + 1
    assert lines[0].count(",") == len(allc)
