import numpy as np
import pytest

from artifact import fibers as fb
from artifact import variety as V
from artifact.errors import ParameterError
from artifact.parahoric import GroupParams


def P_(*case):
    return GroupParams.from_q(*case)


@pytest.fixture(scope="module")
def split_222():
    P = P_(2, 2, 0, 2)
    return P, P.tower(3), fb.enumerate_bases(P, 3)


def test_kappa_zero_only():
    with pytest.raises(ParameterError):
        fb.enumerate_bases(P_(2, 2, 1, 2))
    with pytest.raises(ParameterError):
        fb.enumerate_bases(P_(2, 2, 0, 1))


def test_p1_symbolic_n2(split_222):
    # P1 = xb2^q x1 - xb1^q x2 - xb2 x1^q + xb1 x2^q
    P, F, bases = split_222
    for base in bases[::37]:
        x1, x2 = int(base[0, 0]), int(base[1, 0])
        coef = fb.p1_poly(F, P, base)
        expected = np.zeros((2, F.N), dtype=np.int64)
        expected[0, 0], expected[0, 1] = F.frob(x2, 1), F.neg(x2)
        expected[1, 0], expected[1, 1] = F.neg(F.frob(x1, 1)), x1
        assert np.array_equal(coef, expected)


def test_p0_is_c_plus_p1(split_222):
    P, F, bases = split_222
    rng = np.random.default_rng(0)
    for base in bases[::50]:
        pc = fb.p0_and_c(F, P, base, samples=16)
        tops = F.random(rng, (20, P.n))
        lhs = fb.p0_values(F, P, base, tops)
        rhs = F.add(pc.c, fb.eval_linearised(F, fb.p1_poly(F, P, base), tops))
        assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("case,M", [((2, 2, 0, 2), 3), ((2, 3, 0, 2), 2), ((2, 4, 0, 2), 1)])
def test_mu_grid(case, M):
    P = P_(*case)
    F = P.tower(M)
    n = P.n
    bases = fb.sample_bases(P, M, 12, seed=1) if case[1] == 4 else fb.enumerate_bases(P, M)
    for base in bases[:: max(1, len(bases) // 12)]:
        y = fb.spanning_coefficients(F, base)
        assert y[0] == F.neg(1) if n % 2 == 0 else y[0] == 1
        mu = fb.mast_matrix(F, P, base)
        assert np.array_equal(mu, fb.mast_matrix(F, P, base, method="definition"))
        assert np.all(mu[:, 0] == 1)
        for i in range(1, n + 1):
            for j in range(2, n + 1):
                if i + j <= n + 1:
                    assert mu[i - 1, j - 1] == 0
                elif i + j == n + 2:
                    assert mu[i - 1, j - 1] == F.frob(y[i - 1], -(i - 1))


def test_labels_agree(split_222):
    P, F, bases = split_222
    labs = [fb.base_label(F, P, b) for b in bases]
    assert labs == [fb.krylov_label(F, P, b) for b in bases]
    assert sorted(set(labs)) == [1, 2]


def test_census_m3_frozen():
    cen = fb.fiber_census(P_(2, 2, 0, 2), 3)
    assert cen["by_stratum"] == {2: {256: 6}, 1: {128: 72}}
    assert cen["constant"]


def test_census_matches_brute_force():
    P = P_(2, 2, 0, 2)
    fast = fb.fiber_census(P, 1)
    brute = fb.fiber_census(P, 1, brute=True)
    assert fast["rows"] == brute["rows"]
    assert fast["by_stratum"] == {2: {16: 6}}


@pytest.mark.parametrize("case,M", [((2, 2, 0, 2), 1), ((2, 2, 0, 2), 3), ((2, 3, 0, 2), 1)])
def test_census_equals_point_count_of_Xh_by_stratum(case, M):
    P = P_(*case)
    cen = fb.fiber_census(P, M)
    per = {r: sum(size * k for size, k in d.items()) for r, d in cen["by_stratum"].items()}
    _, lab = V.enumerate_points(P, "Xh", M, budget=1 << 24)
    assert per == V.stratum_histogram(lab)
    if M == 1:
        assert cen["total"] == fb.count_Xh_plus(P, M)


def test_odd_q_sign_leaves_no_rational_base():
    P = P_(3, 2, 0, 2)
    assert len(fb.enumerate_bases(P, 1)) == 0
    assert fb.count_Xh_plus(P, 1) == 0


@pytest.mark.parametrize("case,M", [((2, 2, 0, 2), 1), ((2, 2, 0, 2), 3), ((2, 3, 0, 2), 1),
                                    ((2, 2, 0, 3), 1), ((3, 2, 0, 2), 2)])
def test_verify_normal_form(case, M):
    rep = fb.verify_normal_form(P_(*case), M)
    assert rep["pass"], rep["failures"][:3]
    assert rep["bases"] > 0


def test_normal_form_structure(split_222):
    P, F, bases = split_222
    for base in bases[::20]:
        nf = fb.build_Mr(F, P, base)
        assert nf.ok
        assert nf.g == nf.label
        assert nf.S[0, 0] == 1 and not np.any(np.tril(nf.S, -1))
        assert sorted(nf.T.sum(axis=0).tolist()) == [1] * P.n
        assert nf.stages[0].kind == "linear" and nf.stages[-1].kind == "perm"


@pytest.mark.parametrize("case,M", [((2, 2, 0, 2), 3), ((2, 3, 0, 2), 2)])
def test_coordinate_change_is_galois_equivariant(case, M):
    P = P_(*case)
    F = P.tower(M)
    bases = fb.enumerate_bases(P, M)
    rng = np.random.default_rng(2)
    for base in bases[rng.choice(len(bases), 8, replace=False)]:
        nf = fb.build_Mr(F, P, base)
        nfs = fb.build_Mr(F, P, F.frob(base, 1))
        tops = F.random(rng, (32, P.n))
        lhs = fb.apply_stages(F, nfs, F.frob(tops, 1))
        assert np.array_equal(lhs, F.frob(fb.apply_stages(F, nf, tops), 1))


@pytest.mark.parametrize("case,M", [((2, 4, 0, 2), 2), ((2, 3, 0, 2), 3)])
def test_sampled_larger_fields(case, M):
    P = P_(*case)
    F = P.tower(M)
    for base in fb.sample_bases(P, M, 6, seed=3):
        nf = fb.build_Mr(F, P, base)
        res = fb.check_on_samples(F, P, nf, samples=64)
        assert res["identity"] and res["action"] and not res["flags"]


def test_census_csv():
    cen = fb.fiber_census(P_(2, 2, 0, 2), 1)
    lines = fb.census_csv(cen).strip().splitlines()
    assert lines[0] == "base_id,stratum_r,fiber_count"
    assert len(lines) == 7 and all(l.endswith(",2,16") for l in lines[1:])
