import numpy as np
import pytest

from cisim.cimatrix import (GammaIndex, assemble_from_gammas, build_ci_matrix,
                            ci_entry, count_gamma, enumerate_gammas,
                            gamma_census, gamma_entry, gamma_matrix,
                            sparsity_d)
from cisim.coloring import DIAGONAL_COLOR, ColorTuple, color_of
from cisim.determinants import Determinant, enumerate_basis
from cisim.errors import InvalidCounts, MalformedGamma
from cisim.integrals import IntegralTable

from conftest import brute_ci_entry, random_spinless_basis


def test_single_electron_diagonal(mixed_table):
    det = Determinant((3,), mixed_table.n)
    assert ci_entry(det, det, mixed_table) == pytest.approx(
        mixed_table.h1(3, 3))


def test_two_electron_diagonal_formula(h2_table):
    det = Determinant((1, 2), 4)
    expected = (h2_table.h1(1, 1) + h2_table.h1(2, 2)
                + h2_table.g(1, 2, 1, 2) - h2_table.g(1, 2, 2, 1))
    assert ci_entry(det, det, h2_table) == pytest.approx(expected)


def test_full_matrix_against_brute_force(h2_table):
    dets = enumerate_basis(4, 2)
    for a in dets:
        for b in dets:
            sc = ci_entry(a, b, h2_table)
            bf = brute_ci_entry(a, b, h2_table)
            assert abs(sc - bf) < 1e-10


def test_full_matrix_against_brute_force_spinless(mixed_table):
    dets = enumerate_basis(mixed_table.n, 3)
    rng = np.random.default_rng(4)
    idx = rng.choice(len(dets), size=8, replace=False)
    for i in idx:
        for j in idx:
            sc = ci_entry(dets[i], dets[j], mixed_table)
            bf = brute_ci_entry(dets[i], dets[j], mixed_table)
            assert abs(sc - bf) < 1e-10


def test_more_than_two_differences_vanish(mixed_table):
    a = Determinant((1, 2, 3), 6)
    b = Determinant((4, 5, 6), 6)
    assert ci_entry(a, b, mixed_table) == 0


def test_hermiticity(h2_table):
    H = build_ci_matrix(h2_table, 2)
    assert np.max(np.abs(H - H.conj().T)) < 1e-12


def test_sparsity_formula_examples():
    assert sparsity_d(4, 2) == 6
    assert sparsity_d(8, 3) == 46
    with pytest.raises(InvalidCounts):
        sparsity_d(3, 4)


def test_sparsity_bound_and_attainment():
    rng = np.random.default_rng(17)
    for norb, eta in [(5, 2), (6, 3), (7, 4)]:
        basis = random_spinless_basis(rng, norb)
        table = IntegralTable(basis, [(1.0, (0.0, 0.0, 0.0))])
        H = build_ci_matrix(table, eta)
        nz = np.sum(np.abs(H) > 1e-12, axis=1)
        d = sparsity_d(norb, eta)
        assert np.max(nz) <= d
        assert np.max(nz) == d


def test_partition_identity(h2_table, mixed_table):
    for table, eta in [(h2_table, 2), (mixed_table, 2), (mixed_table, 3)]:
        H = build_ci_matrix(table, eta)
        Hg = assemble_from_gammas(table, eta)
        assert np.max(np.abs(H - Hg)) < 1e-12


def test_each_term_is_one_sparse(mixed_table):
    basis = enumerate_basis(mixed_table.n, 2)
    index = {d.occ: k for k, d in enumerate(basis)}
    rng = np.random.default_rng(8)
    gammas = enumerate_gammas(mixed_table.n, 2)
    for gi in rng.choice(len(gammas), size=300, replace=False):
        M = gamma_matrix(gammas[gi], basis, mixed_table, index)
        assert np.max(np.sum(np.abs(M) > 0, axis=1)) <= 1
        assert np.max(np.sum(np.abs(M) > 0, axis=0)) <= 1


def test_count_gamma_matches_enumeration():
    for norb, eta in [(4, 2), (5, 3), (6, 1), (8, 4)]:
        assert count_gamma(norb, eta) == len(enumerate_gammas(norb, eta))


def test_no_exchange_diagonal_labels_for_single_electron():
    labels = enumerate_gammas(5, 1)
    diag = [g for g in labels if g.family == "diagonal"]
    assert len(diag) == 1 and diag[0].i == diag[0].j == 1


def test_gamma_entry_diagonal_example(h2_table):
    alpha = Determinant((2, 4), 4)
    g = GammaIndex(DIAGONAL_COLOR, 1, 1)
    entry = gamma_entry(g, alpha, h2_table)
    assert entry.beta == alpha
    assert entry.value == pytest.approx(h2_table.h1(2, 2))


def test_gamma_entry_invalid_color_gives_none(h2_table):
    # shifting orbital 4 upward runs out of range for every node holding it
    color = ColorTuple(0, 0, 1, 0, 0, 0, 2, 1)
    alpha = Determinant((3, 4), 4)
    assert gamma_entry(GammaIndex(color, 1, 0), alpha, h2_table) is None


def test_gamma_entry_reconstructs_single_difference(h2_table):
    alpha, beta = Determinant((1, 2), 4), Determinant((1, 3), 4)
    color = color_of(alpha, beta)
    total = 0.0
    for i in range(1, 3):
        total += gamma_entry(GammaIndex(color, i, 0), alpha, h2_table).value
    assert total == pytest.approx(ci_entry(alpha, beta, h2_table))


def test_hermitian_partner_rule(h2_table):
    basis = enumerate_basis(4, 2)
    for a in basis:
        for b in basis:
            if a.occ == b.occ or len(set(a.occ) - set(b.occ)) > 2:
                continue
            fwd = color_of(a, b)
            rev = color_of(b, a)
            vf = sum(gamma_entry(g, a, h2_table).value
                     for g in enumerate_gammas(4, 2)
                     if g.color == fwd
                     and gamma_entry(g, a, h2_table) is not None
                     and gamma_entry(g, a, h2_table).beta.occ == b.occ)
            vr = sum(gamma_entry(g, b, h2_table).value
                     for g in enumerate_gammas(4, 2)
                     if g.color == rev
                     and gamma_entry(g, b, h2_table) is not None
                     and gamma_entry(g, b, h2_table).beta.occ == a.occ)
            assert vf == pytest.approx(np.conj(vr))


def test_malformed_gamma():
    with pytest.raises(MalformedGamma):
        GammaIndex(DIAGONAL_COLOR, 2, 1)
    with pytest.raises(MalformedGamma):
        GammaIndex(ColorTuple(0, 0, 1, 1, 0, 0, 1, 0))


def test_gamma_census_shape():
    cen = gamma_census(6, 2)
    assert cen["total"] == count_gamma(6, 2)
    assert cen["diagonal"] == 3
    assert cen["sparsity_d"] == sparsity_d(6, 2)


def test_growth_is_quadratic_in_eta_n():
    # labelled-term count grows no faster than a constant times (eta N)^2
    ratios = [count_gamma(n, 2) / (4 * n * n) for n in (6, 12, 24, 48)]
    assert max(ratios) / min(ratios) < 1.5
    assert ratios[-1] < 64.5
