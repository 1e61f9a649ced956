import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import parahoric as ph
from artifact.errors import ParameterError


def gl_order(q, n):
    out = 1
    for i in range(n):
        out *= q ** n - q ** i
    return out


def test_params_derived_values():
    P = ph.GroupParams.from_q(4, 6, 4, 3)
    assert (P.p, P.a, P.q) == (2, 2, 4)
    assert (P.n0, P.k0, P.nprime) == (3, 2, 2)
    # e is the least e with gcd(e, 6) = 1 and e = 2 mod 3
    assert P.e == 5
    Q = ph.GroupParams.from_q(2, 4, 2, 2)
    assert (Q.n0, Q.k0, Q.nprime, Q.e) == (2, 1, 2, 1)


@pytest.mark.parametrize("bad", [(6, 2, 0, 2), (2, 2, 2, 2), (2, 0, 0, 1), (2, 2, -1, 1)])
def test_params_validation(bad):
    with pytest.raises(ParameterError):
        ph.GroupParams.from_q(*bad)


@pytest.mark.parametrize("n", range(1, 9))
def test_lti_and_gamma(n):
    for kappa in range(n):
        assert ph.lti_check(n, kappa)
        assert ph.check_gamma(ph.GroupParams(2, 1, n, kappa, 1))


@pytest.mark.parametrize("case,orders", [
    ((2, 2, 0, 2), (gl_order(2, 2) * 2 ** 4, 16, 3 * 4, 4)),
    ((3, 2, 0, 1), (gl_order(3, 2), 1, 8, 1)),
    ((2, 3, 0, 1), (gl_order(2, 3), 1, 7, 1)),
    # division algebra cases: units of O_D modulo a power of the uniformizer
    ((2, 2, 1, 2), (3 * 4 ** 2, 16, 12, 4)),
    ((2, 3, 1, 2), (7 * 8 ** 3, 512, 56, 8)),
])
def test_rational_group_orders(case, orders):
    P = ph.GroupParams.from_q(*case)
    F = P.tower()
    got = tuple(len(ph.enumerate_group(F, P, w)) for w in ("Gh", "Gh1", "Th", "Th1"))
    assert got == orders
    for w in ("Gh1", "Th", "Th1"):
        assert ph.group_order_formula(P, w) == orders[("Gh", "Gh1", "Th", "Th1").index(w)]


def test_frobenius_preserves_pattern_and_fixes_group():
    for case in [(2, 2, 0, 2), (2, 2, 1, 2), (2, 4, 2, 2)]:
        P = ph.GroupParams.from_q(*case)
        perm = ph.F_coord_perm(P)
        assert sorted(perm) == list(range(len(P.coords)))
        F = P.tower()
        G = ph.enumerate_group(F, P, "Gh1", budget=1 << 20)
        sample = G[:: max(1, len(G) // 50)]
        assert np.array_equal(ph.frobenius_F(F, P, sample), sample)
        assert np.array_equal(ph.frobenius_F_inv(F, P, ph.frobenius_F(F, P, sample)), sample)


def test_group_closed_under_products_and_inverse():
    P = ph.GroupParams.from_q(2, 2, 1, 2)
    F = P.tower()
    G = ph.enumerate_group(F, P, "Gh")
    keys = {g.tobytes() for g in G}
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, len(G), 40), rng.integers(0, len(G), 40)
    prod = ph.matw_mul(F, P, G[i], G[j])
    assert all(g.tobytes() in keys for g in prod)
    inv = ph.matw_inv(F, P, G[i])
    assert np.array_equal(ph.matw_mul(F, P, G[i], inv), ph.mat_identity(P, (40,)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_det_is_multiplicative(seed):
    P = ph.GroupParams.from_q(3, 2, 0, 2)
    F = P.tower()
    rng = np.random.default_rng(seed)
    A = ph.normalize(P, F.random(rng, (5, 2, 2, 2)))
    B = ph.normalize(P, F.random(rng, (5, 2, 2, 2)))
    from artifact.witt import witt_mul
    lhs = ph.matw_det(F, P, ph.matw_mul(F, P, A, B))
    rhs = witt_mul(F, ph.matw_det(F, P, A), ph.matw_det(F, P, B))
    assert np.array_equal(lhs, rhs)


def test_torus_embedding_is_rational_and_diagonal():
    P = ph.GroupParams.from_q(2, 3, 0, 2)
    F = P.tower()
    U = ph.unit_group_elements(F, P)
    assert len(U) == 7 * 8
    T = ph.torus_embed(F, P, U)
    assert np.array_equal(ph.frobenius_F(F, P, T), T)
    assert all(ph.membership(F, P, t, "Th") for t in T[:10])
    level_one = [ph.membership(F, P, t, "Th1") for t in T]
    assert level_one == (U[:, 0] == 1).tolist()


def test_subgroup_patterns():
    P = ph.GroupParams.from_q(2, 4, 2, 2)
    F = P.tower()
    # L^(2) G^1: a residue entry linking blocks 1 and 2 is forbidden
    g = ph.mat_identity(P)
    assert ph.membership(F, P, g, "LrG1", r=2)
    g2 = g.copy()
    g2[2, 0, 0] = 1
    assert not ph.membership(F, P, g2, "LrG1", r=2)
    # a level-0 entry at (2,1) lies outside the residue blocks, so it is free
    g3 = g.copy()
    g3[1, 0, 0] = 1
    assert ph.membership(F, P, g3, "LrG1", r=2)
    with pytest.raises(ParameterError):
        ph.subgroup_pattern(P, "LrG1")
    with pytest.raises(ParameterError):
        ph.subgroup_pattern(P, "nonsense")


@pytest.mark.parametrize("case,r", [((2, 2, 0, 2), 1), ((2, 2, 0, 2), 2), ((2, 4, 2, 2), 1),
                                    ((2, 4, 2, 2), 2), ((3, 2, 0, 2), 1)])
def test_lang_section(case, r):
    rep = ph.lang_section_check(ph.GroupParams.from_q(*case), r)
    assert rep["ok"]
    assert rep["domain_size"] == rep["target_size"]


def test_g0_conjugates_coxeter_to_special():
    P = ph.GroupParams.from_q(2, 2, 1, 2)
    g0 = ph.find_g0(P)
    F = P.tower()
    assert ph.matw_det(F, P, g0)[0] != 0
