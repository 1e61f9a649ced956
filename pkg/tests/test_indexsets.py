import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import indexsets as ix
from artifact.errors import ParameterError


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@pytest.mark.parametrize("n", range(1, 7))
def test_basic_sizes(n):
    for n0 in divisors(n):
        for h in range(1, 5):
            assert len(ix.A_plus(n, n0, h)) == n * n * (h - 1)
            assert len(ix.A_set(n, n0, h)) == n * (n - 1) * (h - 1)
            assert len(ix.A_minus(n, n0, h)) == (n - 1) * (h - 1)


@pytest.mark.parametrize("n", range(1, 9))
def test_complement_count(n):
    for n0 in divisors(n):
        for h in range(2, 6):
            assert ix.complement_count(n, n0, h) == n // n0 - 1


@pytest.mark.parametrize("n", range(1, 8))
def test_min_sets_explicit(n):
    for n0 in divisors(n):
        for h in range(2, 5):
            assert ix.A_min(n, n0, h) == ix.A_min_explicit(n, n0, h)


def test_small_sets_by_hand():
    # n = 2, n0 = 1, h = 2: off-diagonal entries at level 1 only
    assert ix.A_set(2, 1, 2) == [(1, 2, 1), (2, 1, 1)]
    # n0 = 2: entry (2,1) sits below the diagonal in the Iwahori pattern, so its level is 0
    assert ix.A_set(2, 2, 2) == [(1, 2, 1), (2, 1, 0)]
    assert ix.A_min(2, 2, 2) == [(1, 2, 1), (2, 1, 0)]
    assert ix.A_min(2, 1, 2) == []


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 9), st.integers(-3, 3), st.integers(0, 6), st.integers(1, 8))
def test_dual_reflects_norm(i, dj, l, h):
    n = 9
    j = min(max(1, i + dj), n)
    lam = (i, j, l)
    assert ix.norm(ix.dual(lam, h), n) == n * (h - 1) - ix.norm(lam, n)
    assert ix.dual(ix.dual(lam, h), h) == lam


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_cardinalities_match_closed_forms(seed):
    seq = ix.random_sequences(np.random.default_rng(seed), nmax=10)
    assert ix.cardinalities(seq) == ix.closed_form_cards(seq)
    for s in range(seq.dprime + 1):
        for t in range(seq.dprime + 1):
            assert ix.A_st_min(seq, s, t) == ix.A_st_min_explicit(seq, s, t)


def test_sequences_validation():
    ix.Sequences(4, 2, (1, 2, 4), (3, 2, 1))
    with pytest.raises(ParameterError):
        ix.Sequences(4, 2, (1, 3, 4), (3, 2, 1))
    with pytest.raises(ParameterError):
        ix.Sequences(4, 2, (1, 2, 4), (3, 3, 2))
    with pytest.raises(ParameterError):
        ix.Sequences(4, 3, (1, 4), (2, 1))


def test_ij_map_ill_defined_when_n0_below_n():
    seq = ix.Sequences(2, 1, (1, 2), (3, 1))
    R = ix.ij_injection(seq, 0, 0)
    assert (2, 1, 1) in R["map"]
    assert R["map"][(2, 1, 1)] == (2, 1, 0)
    assert not R["well_defined"]


@pytest.mark.parametrize("n", range(2, 11))
def test_ij_unfiltered_domain(n):
    for ht in range(2, 7):
        seq = ix.Sequences(n, n, (1, n), (ht, 1))
        R = ix.ij_injection(seq, 0, 0)
        assert R["well_defined"] and R["injective"]
        assert R["order_reversing"] and R["norm_sum"]
        both_even = n % 2 == 0 and ht % 2 == 0
        assert R["bijective"] == R["size_even"] == (not both_even)
        assert R["midpoint_in_set"] == both_even


def test_ij_well_defined_implies_bijective_iff_even():
    from artifact.suites import ij_sweep
    full = ij_sweep(10, 6, full=True)
    assert full["bijective_vs_even"] == 0
    assert full["not_injective"] == 0 and full["not_order_reversing"] == 0
    # the literal parity statement fails outside n0 = n
    assert full["ill_defined"] > 0 and full["parity_claim"] > 0


def test_symbolic_det_small():
    # n = 1: the 1 x 1 generic matrix is its own determinant
    assert ix.symbolic_det(1, 1, 3, 3) == [{(): 1}, {((1, 1, 1),): 1}, {((1, 1, 2),): 1}]
    # n = 2, h' = 2: the pi^1 coefficient is the trace x_{(1,1,1)} + x_{(2,2,1)}
    assert ix.symbolic_det(2, 1, 2, 2)[1] == {((1, 1, 1),): 1, ((2, 2, 1),): 1}


@pytest.mark.parametrize("n,hp", [(n, hp) for n in (1, 2, 3) for hp in (1, 2, 3)])
def test_det_contribution_scan(n, hp):
    for n0 in divisors(n):
        R = ix.det_contribution_scan(n, hp, n0=n0)
        assert R["pass"]
        assert not R["violations"] and not R["non_dual"]


def test_det_diagonal_extremal_pairs_exist():
    R = ix.det_contribution_scan(2, 3, n0=1)
    # x_{(1,1,1)} x_{(2,2,1)} pi^2 comes from the identity permutation
    assert R["diagonal_extremal"] == [((1, 1, 1), (2, 2, 1))]
    R = ix.det_contribution_scan(3, 3, n0=1)
    assert all(a[0] == a[1] or b[0] == b[1] for a, b in R["diagonal_extremal"])


def test_build_set_dispatch():
    seq = ix.Sequences(4, 1, (1, 2, 4), (3, 2, 1))
    assert ix.build_set("A", 4, 1, 3) == ix.A_set(4, 1, 3)
    assert ix.build_set("I_st", seq=seq, s=0, t=1) == ix.I_st(seq, 0, 1)
    with pytest.raises(ParameterError):
        ix.build_set("A_st", 4, 1, 3)
    with pytest.raises(ParameterError):
        ix.build_set("bogus", seq=seq)
