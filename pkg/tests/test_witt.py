import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import ffield, witt
from artifact.errors import ParameterError

F4 = ffield.get_tower(2, 2, 1)
F16 = ffield.get_tower(2, 2, 2)
F9 = ffield.get_tower(3, 1, 2)


def poly_mul_mod(F, a, b):
    """Naive truncated product, written independently of witt_mul."""
    h = len(a)
    out = [0] * h
    for i in range(h):
        for j in range(h):
            if i + j < h:
                out[i + j] = int(F.add(out[i + j], F.mul(a[i], b[j])))
    return out


def test_mul_matches_naive_products():
    rng = np.random.default_rng(0)
    for F in (F4, F9):
        for h in (1, 2, 3, 5):
            a, b = F.random(rng, (50, h)), F.random(rng, (50, h))
            got = witt.witt_mul(F, a, b)
            for x, y, g in zip(a, b, got):
                assert g.tolist() == poly_mul_mod(F, x, y)


def test_small_products_frozen():
    # over F_2: (1 + pi)^2 = 1 + pi^2
    F2 = ffield.get_tower(2, 1, 1)
    assert witt.witt_mul(F2, [1, 1, 0], [1, 1, 0]).tolist() == [1, 0, 1]
    # over F_3: (1 + pi)(1 - pi) = 1 - pi^2
    F3 = ffield.get_tower(3, 1, 1)
    assert witt.witt_mul(F3, [1, 1, 0], [1, 2, 0]).tolist() == [1, 0, 2]


def test_inverse_and_units():
    rng = np.random.default_rng(1)
    a = F9.random(rng, (100, 4))
    a[:, 0] = np.where(a[:, 0] == 0, 1, a[:, 0])
    one = np.zeros(4, dtype=np.int64)
    one[0] = 1
    assert np.all(witt.witt_mul(F9, a, witt.witt_inv(F9, a)) == one)
    with pytest.raises(ZeroDivisionError):
        witt.witt_inv(F9, [0, 1])


def test_verschiebung_and_reduction():
    a = np.array([1, 2, 3])
    assert witt.verschiebung(F4, a).tolist() == [0, 1, 2]
    assert witt.witt_scale(F4, a, 5).tolist() == [0, 0, 0]
    assert witt.reduce_level(a, 2).tolist() == [1, 2]
    with pytest.raises(ParameterError):
        witt.reduce_level(a, 4)


def test_wittvec_wrapper():
    x = witt.WittVec(F4, [2, 1, 0])
    y = witt.WittVec(F4, [3, 0, 1])
    assert (x * y).tolist() == witt.witt_mul(F4, x.coeffs, y.coeffs).tolist()
    assert x * x.inverse() == witt.WittVec.one(F4, 3)
    assert (x - x) == witt.WittVec.zero(F4, 3)
    assert x.sigma().tolist() == [int(F4.frob(2, 1)), 1, 0]
    with pytest.raises(ParameterError):
        x + witt.WittVec(F4, [1, 0])


def test_lattice_shape_rule():
    witt.LatticeVec(F4, 2, 1, 2, [[1, 1], [2, 3]])
    witt.LatticeVec(F4, 2, 2, 2, [[1, 1], [2, 0]])
    with pytest.raises(ParameterError):
        witt.LatticeVec(F4, 2, 2, 2, [[1, 1], [2, 3]])
    with pytest.raises(ParameterError):
        witt.LatticeVec(F4, 2, 2, 2, [[1, 1], [2, 3]], plus=True)


def test_twisted_product_over_fq_is_untwisted():
    # over F_q every coefficient is fixed by the q-power map
    rng = np.random.default_rng(2)
    a, b = F4.random(rng, (200, 4)), F4.random(rng, (200, 4))
    assert np.array_equal(witt.twisted_mul(F4, a, b), witt.witt_mul(F4, a, b))


def test_displayed_twisted_product_fails_over_extension():
    rng = np.random.default_rng(3)
    a, b, c = (F16.random(rng, (500, 3)) for _ in range(3))
    comm = np.all(witt.twisted_mul(F16, a, b) == witt.twisted_mul(F16, b, a), axis=-1)
    assoc = np.all(witt.twisted_mul(F16, witt.twisted_mul(F16, a, b), c)
                   == witt.twisted_mul(F16, a, witt.twisted_mul(F16, b, c)), axis=-1)
    assert not comm.all()
    assert not assoc.all()


def _untwist(F, a):
    # a_i -> a_i^{q^{-i}} carries the symmetric product to the power-series product
    return np.stack([F.frob(a[..., i], -i) for i in range(a.shape[-1])], axis=-1)


def test_symmetric_variant_is_power_series_ring():
    rng = np.random.default_rng(4)
    a, b = F16.random(rng, (300, 4)), F16.random(rng, (300, 4))
    lhs = _untwist(F16, witt.twisted_mul_symmetric(F16, a, b))
    rhs = witt.witt_mul(F16, _untwist(F16, a), _untwist(F16, b))
    assert np.array_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2 ** 31))
def test_symmetric_variant_ring_axioms(h, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (F16.random(rng, (20, h)) for _ in range(3))
    m = witt.twisted_mul_symmetric
    assert np.array_equal(m(F16, a, b), m(F16, b, a))
    assert np.array_equal(m(F16, m(F16, a, b), c), m(F16, a, m(F16, b, c)))
    assert np.array_equal(m(F16, a, F16.add(b, c)), F16.add(m(F16, a, b), m(F16, a, c)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 1, 3), (3, 1, 2), (2, 2, 1)]), st.integers(1, 5), st.integers(0, 2 ** 31))
def test_witt_ring_axioms(tower, h, seed):
    F = ffield.get_tower(*tower)
    rng = np.random.default_rng(seed)
    a, b, c = (F.random(rng, (20, h)) for _ in range(3))
    m = witt.witt_mul
    assert np.array_equal(m(F, a, b), m(F, b, a))
    assert np.array_equal(m(F, m(F, a, b), c), m(F, a, m(F, b, c)))
    assert np.array_equal(m(F, a, F.add(b, c)), F.add(m(F, a, b), m(F, a, c)))
    # Frobenius is a ring endomorphism
    assert np.array_equal(F.frob(m(F, a, b), 1), m(F, F.frob(a, 1), F.frob(b, 1)))


def test_mult_matrix_realizes_product():
    rng = np.random.default_rng(5)
    c = F9.random(rng, 3)
    x = F9.random(rng, 3)
    M = witt.witt_mult_matrix(F9, c, 3)
    xd = F9.digits(x).astype(np.int64).reshape(-1)
    yd = (M @ xd) % 3
    y = F9.from_digits(yd.reshape(3, F9.k))
    assert y.tolist() == witt.witt_mul(F9, c, x).tolist()
