import numpy as np
import pytest

from artifact import chars, lefschetz as lf
from artifact import parahoric as ph
from artifact.variety import count_Xh1


def P_(*case):
    return ph.GroupParams.from_q(*case)


def one_t(P):
    t = np.zeros(P.h, dtype=np.int64)
    t[0] = 1
    return t


@pytest.mark.parametrize("case", [(2, 2, 0, 2), (2, 2, 1, 2), (3, 2, 0, 2)])
def test_identity_counts_are_point_counts(case):
    P = P_(*case)
    assert lf.twisted_count(P, "Xh1").count == count_Xh1(P)
    assert lf.twisted_count(P, "Xh1", s=2).count == count_Xh1(P, M=2)
    # at g = 1 only t = 1 contributes on X_h^1
    H = lf.twisted_histogram(P, "Xh1")
    assert H.total() == H.get(one_t(P))


@pytest.mark.parametrize("case", [(2, 2, 0, 2), (2, 2, 1, 2)])
def test_engine_agrees_with_direct_solver(case):
    P = P_(*case)
    F0 = P.tower()
    G = ph.enumerate_group(F0, P, "Gh1")
    T = ph.unit_group_elements(F0, P, level1=True)
    rng = np.random.default_rng(0)
    for gi in rng.choice(len(G), 4, replace=False):
        g = G[gi]
        H = lf.twisted_histogram(P, "Xh1", g, 1)
        for t in T[:: max(1, len(T) // 3)]:
            assert H.get(t) == lf.direct_twisted_count(P, "Xh1", g, t, 1)


def test_engine_on_whole_variety_and_closure():
    P = P_(2, 2, 0, 2)
    F0 = P.tower()
    G = ph.enumerate_group(F0, P, "Gh")
    g = G[5]
    T = ph.unit_group_elements(F0, P)
    Ha = lf.twisted_histogram(P, "Xh", g, 1)
    Hc = lf.twisted_histogram(P, "closure", g, 1, r=2)
    for t in T[::3]:
        assert Ha.get(t) == lf.direct_twisted_count(P, "Xh", g, t, 1)
        assert Hc.get(t) == lf.direct_twisted_count(P, "closure", g, t, 1, r=2)


def test_twist_calibration():
    rep = lf.calibrate_twist(P_(2, 2, 0, 2))
    assert rep["chosen"] == 0
    assert rep["candidates"][1]["t_forcing"] is False


@pytest.mark.parametrize("case", [(2, 2, 0, 2), (3, 2, 0, 2), (2, 2, 1, 2), (2, 2, 1, 3)])
def test_eigenspace_degrees_match_formula(case):
    P = P_(*case)
    _, allc = lf.level_one_characters(P)
    total = 0
    for chi, sec in zip(allc, lf.eigenspace_degrees(P, allc)):
        hd = chars.chi_invariants(chi)
        r, _, _ = chars.degree_r_chi(hd, P.n, P.n0)
        assert (sec.r, sec.dim) == (r, chars.dim_formula(hd, P.n, P.n0, P.q, P.h))
        assert sec.S2 == (-1) ** r * P.q ** (P.n * r) * sec.dim
        total += sec.dim * P.q ** (P.n * r // 2)
    assert total == P.q ** (P.n * P.n * (P.h - 1))


@pytest.mark.parametrize("case", [(2, 2, 0, 2), (2, 2, 1, 2)])
def test_character_table_orthonormal(case):
    table = lf.CharacterTable(P_(*case))
    G = lf.inner_product_matrix(table)
    assert np.array_equal(G, np.eye(len(table.chis), dtype=np.int64))
    # the value at the identity is the dimension
    P = table.P
    idx = [i for i, g in enumerate(table.group) if np.array_equal(g, ph.mat_identity(P))][0]
    for ci, d in enumerate(table.dims()):
        assert chars.cyclo_as_integer(table.value(ci, idx), table.model.L) == d


def test_very_regular_elements_generate_field():
    P = P_(2, 2, 0, 2)
    U = lf.very_regular_elements(P)
    F0 = P.tower()
    assert len(U) == 2 * 4  # residue in F_4 minus F_2, any level-one part
    assert not np.any(F0.in_subfield(U[:, 0], 1))


@pytest.mark.parametrize("case", [(2, 2, 0, 2), (2, 2, 1, 2)])
def test_very_regular_trace_sample(case):
    P = P_(*case)
    M = chars.model_for(P)
    U = lf.very_regular_elements(P)
    rng = np.random.default_rng(1)
    for th in [M.characters()[i] for i in rng.choice(M.order, 3, replace=False)]:
        rep = lf.very_regular_check(P, th, U[0], P.nprime)
        assert rep["pass"], rep


def test_maximality_report():
    rep = lf.maximality_check(P_(2, 2, 0, 2))
    assert rep["pass"]
    assert [c["got"] for c in rep["checks"]] == [16, 16]


def test_cxh_single_character():
    P = P_(3, 2, 0, 2)
    M = chars.model_for(P)
    th = next(t for t in M.characters() if t.stabilizer_degree(1) == 2)
    rep = lf.cxh_evidence(P, th, 2, (1,), {1: (6,)}, count=2)
    assert rep["all_zero"]
    assert all("zero" in row for row in rep["rows"])
