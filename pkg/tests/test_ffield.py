import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import ffield
from artifact.errors import ParameterError, WidenField

TOWERS = [(2, 1, 4), (3, 1, 2), (2, 2, 2), (5, 1, 2), (3, 2, 1)]


def slow_mul(F, x, y):
    """Schoolbook product of digit polynomials reduced by the tower modulus."""
    p, k = F.p, F.k
    a = [(x // p ** i) % p for i in range(k)]
    b = [(y // p ** i) % p for i in range(k)]
    prod = [0] * (2 * k - 1)
    for i in range(k):
        for j in range(k):
            prod[i + j] = (prod[i + j] + a[i] * b[j]) % p
    mod = F.modulus
    for d in range(2 * k - 2, k - 1, -1):
        c = prod[d]
        if c:
            for i in range(k + 1):
                prod[d - k + i] = (prod[d - k + i] - c * mod[i]) % p
    return sum(prod[i] * p ** i for i in range(k))


@pytest.mark.parametrize("p,a,N", TOWERS)
def test_multiplication_matches_schoolbook(p, a, N):
    F = ffield.get_tower(p, a, N)
    rng = np.random.default_rng(1)
    xs = F.random(rng, 200)
    ys = F.random(rng, 200)
    got = F.mul(xs, ys)
    assert [int(g) for g in got] == [slow_mul(F, int(x), int(y)) for x, y in zip(xs, ys)]


def test_small_fields_frozen():
    F4 = ffield.get_tower(2, 2, 1)
    assert F4.modulus == (1, 1, 1)
    # x * x = x + 1 in F_4 = F_2[x]/(x^2+x+1)
    assert int(F4.mul(2, 2)) == 3
    F9 = ffield.get_tower(3, 1, 2)
    assert F9.order == 9
    assert len(np.unique(F9.exp[:8])) == 8


@pytest.mark.parametrize("p,a,N", TOWERS)
def test_frobenius_is_q_power(p, a, N):
    F = ffield.get_tower(p, a, N)
    x = np.arange(F.order)
    assert np.array_equal(F.frob(x, 1), F.power(x, F.q))
    assert np.array_equal(F.frob(x, N), x)
    assert np.array_equal(F.frob(F.frob(x, 1), -1), x)


def test_subfields_and_trace_norm():
    F = ffield.get_tower(2, 1, 6)
    for m in (1, 2, 3, 6):
        els = F.subfield_elements(m)
        assert len(np.unique(els)) == 2 ** m
        assert np.all(F.in_subfield(els, m))
    x = np.arange(F.order)
    tr = F.trace_to(x, 2)
    assert np.all(F.in_subfield(tr, 2))
    # trace onto F_4 is surjective with equal fibers
    _, counts = np.unique(tr, return_counts=True)
    assert set(counts.tolist()) == {16}
    nm = F.norm_to(x[1:], 3)
    _, counts = np.unique(nm, return_counts=True)
    assert len(counts) == 7 and set(counts.tolist()) == {9}


def test_bad_parameters():
    with pytest.raises(ParameterError):
        ffield.FieldTower(4, 1, 1)
    with pytest.raises(ParameterError):
        ffield.get_tower(2, 1, 4).subfield_elements(3)
    with pytest.raises(WidenField):
        ffield.FieldTower(2, 1, 40)


def test_embedding_is_a_homomorphism():
    Fs, Fb = ffield.get_tower(2, 1, 2), ffield.get_tower(2, 1, 4)
    e = ffield.embedding(Fs, Fb)
    x, y = np.meshgrid(np.arange(4), np.arange(4))
    assert np.array_equal(e[Fs.mul(x, y)], Fb.mul(e[x], e[y]))
    assert np.array_equal(e[Fs.add(x, y)], Fb.add(e[x], e[y]))
    assert np.all(Fb.in_subfield(e, 2))


def test_matrix_algebra():
    F = ffield.get_tower(3, 1, 2)
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = F.random(rng, (3, 3))
        d = ffield.det(F, A)
        adj = ffield.adjugate(F, A)
        prod = ffield.mat_mul(F, A, adj)
        assert np.array_equal(prod, F.mul(np.eye(3, dtype=np.int64), d))
        if d:
            assert np.array_equal(ffield.mat_mul(F, A, ffield.inverse(F, A)), np.eye(3, dtype=np.int64))
            assert ffield.rank(F, A) == 3
        else:
            assert ffield.rank(F, A) < 3
    Ms = F.random(rng, (30, 3, 4))
    assert ffield.batched_rank(F, Ms).tolist() == [ffield.rank(F, M) for M in Ms]


def test_fp_linear_algebra():
    A = np.array([[1, 2, 0], [2, 4, 0], [0, 0, 1]])
    assert ffield.fp_rank(A, 5) == 2
    ker = ffield.fp_nullspace(A, 5)
    assert ker.shape == (1, 3)
    assert np.all((A @ ker.T) % 5 == 0)


def test_semilinear_solutions():
    F = ffield.get_tower(2, 1, 4)
    A = np.array([[0, 1], [1, 0]])
    basis = ffield.semilinear_fp_basis(F, A, 2)
    assert basis.shape[0] == 2 * 2
    for v in basis:
        assert np.array_equal(F.frob(v, 2), ffield.mat_vec(F, A, v))
    with pytest.raises(WidenField):
        ffield.semilinear_fp_basis(ffield.get_tower(2, 1, 2), A, 1 + 2)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TOWERS), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_field_axioms(tower, i, j, k):
    F = ffield.get_tower(*tower)
    x, y, z = i % F.order, j % F.order, k % F.order
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z))
    assert F.sub(F.add(x, y), y) == x
    if x:
        assert F.mul(x, F.inv(x)) == 1
    # Frobenius is additive and multiplicative
    assert F.frob(F.add(x, y), 1) == F.add(F.frob(x, 1), F.frob(y, 1))
    assert F.frob(F.mul(x, y), 1) == F.mul(F.frob(x, 1), F.frob(y, 1))
