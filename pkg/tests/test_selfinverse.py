import numpy as np
import pytest

from cisim.errors import PatternMismatch
from cisim.selfinverse import (decompose, decompose_dense, reconstruct,
                               remove_zeros, round_aleph, round_modulus,
                               split_C)


def test_round_examples():
    assert round_aleph(1.3, 0.5) == 1.0
    assert round_aleph(0.0, 0.3) == 0.0
    # value exactly zeta: 0.5 steps from zero, ties go to the even multiple
    assert round_aleph(0.5, 0.5) == 0.0
    assert round_aleph(1.5, 0.5) == 2.0  # 1.5 steps -> even multiple 2
    assert abs(round_aleph(1.3 + 0.7j, 0.5) - (1.0 + 1.0j)) < 1e-15


def test_round_error_within_zeta():
    rng = np.random.default_rng(3)
    for _ in range(200):
        z = complex(rng.normal(), rng.normal())
        zeta = float(rng.uniform(0.01, 0.5))
        r = round_aleph(z, zeta)
        assert abs(r.real - z.real) <= zeta + 1e-12
        assert abs(r.imag - z.imag) <= zeta + 1e-12
        rm = round_modulus(z, zeta)
        assert abs(abs(rm) - abs(z)) <= zeta + 1e-12
        assert abs(rm - z) <= zeta + 1e-12


def test_split_two_sided_rule():
    # C = 4 contributes +2 at the first two thresholds and nothing after
    assert [split_C(4, m) for m in (1, 2, 3)] == [2, 2, 0]
    assert [split_C(-4, m) for m in (1, 2, 3)] == [-2, -2, 0]
    assert split_C(0, 1) == 0


def test_split_reconstructs_even_integers():
    # the scaled entries are always even after rounding; the threshold
    # slices sum back exactly
    M = 5
    for c in range(-10, 11, 2):
        assert sum(split_C(c, m) for m in range(1, M + 1)) == c


def test_split_odd_inputs_truncate_toward_zero():
    M = 6
    for c in range(-11, 12):
        total = sum(split_C(c, m) for m in range(1, M + 1))
        assert total == 2 * int(c / 2)


def _random_involution_matrix(rng, dim, zeta=None):
    idx = list(range(dim))
    rng.shuffle(idx)
    perm = np.arange(dim)
    for a, b in zip(idx[0::2], idx[1::2]):
        perm[a], perm[b] = b, a
    vals = np.zeros(dim, dtype=complex)
    for x in range(dim):
        y = perm[x]
        if y > x:
            v = rng.normal()
            vals[x] = vals[y] = v
        elif y == x:
            vals[x] = rng.normal()
    return perm, vals


def test_remove_zeros_placement():
    perm = np.array([1, 0, 3, 2])
    c_m = np.array([2, 2, 0, 0])
    (p1, s1), (p2, s2) = remove_zeros(c_m, perm)
    assert np.array_equal(p1, perm) and np.array_equal(p2, perm)
    # nonzero entries split equally; zero columns get +1 / -1 fixups
    assert list(s1) == [1, 1, 1, 1]
    assert list(s2) == [1, 1, -1, -1]
    dense1 = np.zeros((4, 4), complex)
    dense1[np.arange(4), p1] = s1
    dense2 = np.zeros((4, 4), complex)
    dense2[np.arange(4), p2] = s2
    for d in (dense1, dense2):
        assert np.allclose(d @ d, np.eye(4))
        assert np.allclose(d, d.conj().T)


def test_remove_zeros_pattern_check():
    with pytest.raises(PatternMismatch):
        remove_zeros(np.array([2, 0]), np.array([1, 1]))


def test_terms_are_hermitian_involutions():
    rng = np.random.default_rng(11)
    for trial in range(20):
        dim = int(rng.integers(4, 64))
        perm, vals = _random_involution_matrix(rng, dim)
        terms, meta = decompose(perm, vals, zeta=0.1)
        assert len(terms) == 2 * meta.M
        for t in terms:
            D = t.as_dense()
            assert np.allclose(D, D.conj().T)
            assert np.allclose(D @ D, np.eye(dim), atol=1e-12)
            mags = np.abs(D)
            assert np.all((mags < 1e-12) | (np.abs(mags - 1.0) < 1e-12))
            assert np.max(np.sum(mags > 0, axis=1)) == 1


def test_decompose_exact_multiples_reconstruct_exactly():
    perm = np.array([1, 0, 2, 4, 3])
    zeta = 0.05
    vals = np.array([4, 4, -2, 6, 6], dtype=complex) * 2 * zeta
    terms, meta = decompose(perm, vals, zeta)
    H = reconstruct(terms, zeta, 5)
    dense = np.zeros((5, 5), complex)
    dense[np.arange(5), perm] = vals
    assert np.max(np.abs(H - dense)) < 1e-14


def test_decompose_random_within_zeta():
    rng = np.random.default_rng(23)
    dim, zeta = 32, 1e-3
    perm, vals = _random_involution_matrix(rng, dim)
    terms, meta = decompose(perm, vals, zeta)
    H = reconstruct(terms, zeta, dim)
    dense = np.zeros((dim, dim), complex)
    dense[np.arange(dim), perm] = vals
    assert np.max(np.abs(H - dense)) <= zeta + 1e-12
    # and the reconstruction equals the rounded values exactly
    rounded = np.zeros_like(dense)
    for x in range(dim):
        rounded[x, perm[x]] = round_modulus(vals[x], zeta)
    assert np.max(np.abs(H - rounded)) < 1e-12


def test_decompose_diagonal_entries():
    # self-paired rows (alpha = beta) go through the same construction
    perm = np.arange(4)
    vals = np.array([0.2, -0.4, 0.0, 0.6], dtype=complex)
    terms, meta = decompose(perm, vals, zeta=0.1)
    H = reconstruct(terms, 0.1, 4)
    assert np.allclose(np.diag(H), [0.2, -0.4, 0.0, 0.6])
    for t in terms:
        D = t.as_dense()
        assert np.allclose(D @ D, np.eye(4))


def test_decompose_dense_roundtrip():
    A = np.zeros((4, 4), complex)
    A[0, 1] = A[1, 0] = 0.35
    A[2, 2] = -0.15
    terms, meta = decompose_dense(A, zeta=0.05)
    H = reconstruct(terms, 0.05, 4)
    assert np.max(np.abs(H - A)) <= 0.05 + 1e-12


def test_decompose_rejects_non_hermitian():
    perm = np.array([1, 0])
    vals = np.array([1.0, 2.0], dtype=complex)  # not symmetric
    with pytest.raises(PatternMismatch):
        decompose(perm, vals, zeta=0.1)
    with pytest.raises(PatternMismatch):
        decompose(np.array([1, 1]), np.array([1.0, 1.0]), zeta=0.1)
