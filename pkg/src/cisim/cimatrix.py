"""CI matrix elements and their split into one-sparse colored terms.

Matrix elements follow the Slater-Condon rules with the alignment sign
of the sorting permutation, using the integral conventions of
:mod:`cisim.integrals` (h1 and g = <ij|kl>):

    same orbitals:      sum_i h1(x_i, x_i)
                        + sum_{i<j} g(x_i,x_j,x_i,x_j) - g(x_i,x_j,x_j,x_i)
    one differs (k->l): h1(k,l) + sum_chi g(k,chi,l,chi) - g(k,chi,chi,l)
    two differ:         g(x1,x2,y1,y2) - g(x1,x2,y2,y1)
    more than two:      0

Every color of :mod:`cisim.coloring` carries at most one matrix element
per row; the diagonal and single-difference families are further
indexed by term selectors (i, j) so that each labelled term holds a
bounded number of integrals and the labelled terms sum back to the full
matrix entry.  A label is the pair (color, selectors); the admissible
label set is:

    diagonal family   one canonical color, selectors 1 <= i <= j <= eta
    single family     every nonzero move in the second 4-tuple,
                      selector i in 1..eta (i = eta picks the bare
                      one-electron part, smaller i the chi_i exchange
                      pair), j unused (0)
    double family     every pair of nonzero moves, selectors unused
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .coloring import (DIAGONAL_COLOR, INVALID, LEFT, ColorTuple,
                       apply_color, movement_tuples)
from .determinants import Determinant, align_and_diff, enumerate_basis
from .errors import InvalidCounts, MalformedGamma
from .integrals import IntegralTable

from math import comb


@dataclass(frozen=True, slots=True)
class GammaIndex:
    """A one-sparse term label: a color plus Slater-Condon term selectors."""

    color: ColorTuple
    i: int = 0
    j: int = 0

    def __post_init__(self):
        c = self.color
        if c.q == 0 and c.p != 0:
            raise MalformedGamma("q = 0 requires p = 0")
        if c.p == 0 and c.q == 0:
            if not 1 <= self.i <= self.j:
                raise MalformedGamma("diagonal labels need 1 <= i <= j")
        elif c.p == 0:
            if self.i < 1:
                raise MalformedGamma("single-difference labels need i >= 1")

    @property
    def family(self) -> str:
        if self.color.p == 0 and self.color.q == 0:
            return "diagonal"
        return "single" if self.color.p == 0 else "double"


@dataclass(frozen=True, slots=True)
class OneSparseEntry:
    alpha: Determinant
    beta: Determinant
    value: complex


def ci_entry(alpha: Determinant, beta: Determinant, table: IntegralTable) -> complex:
    """<alpha| H |beta> by the Slater-Condon rules with alignment sign."""
    diff = align_and_diff(alpha, beta)
    if diff.count > 2:
        return 0.0 + 0.0j
    if diff.count == 0:
        occ = alpha.occ
        val = sum(table.h1(x, x) for x in occ)
        for a, b in itertools.combinations(occ, 2):
            val += table.g(a, b, a, b) - table.g(a, b, b, a)
        return complex(val)
    if diff.count == 1:
        k = alpha.occ[diff.positions_left[0] - 1]
        l = beta.occ[diff.positions_right[0] - 1]
        val = table.h1(k, l)
        for chi in diff.common:
            val += table.g(k, chi, l, chi) - table.g(k, chi, chi, l)
        return diff.sign * complex(val)
    x1, x2 = (alpha.occ[p - 1] for p in diff.positions_left)
    y1, y2 = (beta.occ[p - 1] for p in diff.positions_right)
    return diff.sign * complex(
        table.g(x1, x2, y1, y2) - table.g(x1, x2, y2, y1))


def sparsity_d(norb: int, eta: int) -> int:
    """Maximum nonzeros per CI row: C(eta,2) C(N-eta,2) + eta (N-eta) + 1."""
    if eta < 1 or eta > norb:
        raise InvalidCounts(f"eta={eta} not in [1, N={norb}]")
    return comb(eta, 2) * comb(norb - eta, 2) + eta * (norb - eta) + 1


def build_ci_matrix(table: IntegralTable, eta: int) -> np.ndarray:
    """Dense CI matrix over the lexicographic determinant basis."""
    basis = enumerate_basis(table.n, eta)
    dim = len(basis)
    H = np.zeros((dim, dim), dtype=complex)
    for ia, da in enumerate(basis):
        for ib in range(ia, dim):
            v = ci_entry(da, basis[ib], table)
            H[ia, ib] = v
            H[ib, ia] = np.conj(v)
    return H


# ---------------------------------------------------------------------------
# labelled one-sparse terms


def enumerate_gammas(norb: int, eta: int) -> list[GammaIndex]:
    """All admissible term labels for a basis of size (N, eta)."""
    out = []
    for i in range(1, eta + 1):
        for j in range(i, eta + 1):
            out.append(GammaIndex(DIAGONAL_COLOR, i, j))
    moves = movement_tuples(norb, eta)
    for a, b, l, s in moves:
        color = ColorTuple(0, 0, 1, 0, a, b, l, s)
        for i in range(1, eta + 1):
            out.append(GammaIndex(color, i, 0))
    for m1 in moves:
        for m2 in moves:
            out.append(GammaIndex(ColorTuple(*m1, *m2), 0, 0))
    return out


def count_gamma(norb: int, eta: int) -> int:
    """Closed-form size of the admissible label family."""
    if eta < 1 or eta > norb:
        raise InvalidCounts(f"eta={eta} not in [1, N={norb}]")
    n_moves = 8 * eta * (norb - 1)
    return eta * (eta + 1) // 2 + n_moves * eta + n_moves**2


def term_value(gamma: GammaIndex, src: Determinant, dst: Determinant,
               diff, table: IntegralTable) -> complex:
    """Value of one labelled term at (src, dst), given their diff report."""
    c = gamma.color
    if c.p == 0 and c.q == 0:
        occ = src.occ
        i, j = gamma.i, gamma.j
        if j > src.eta:
            raise MalformedGamma("diagonal selector beyond eta")
        if i == j:
            return complex(table.h1(occ[i - 1], occ[i - 1]))
        a, b = occ[i - 1], occ[j - 1]
        return complex(table.g(a, b, a, b) - table.g(a, b, b, a))
    if c.p == 0:
        k = src.occ[diff.positions_left[0] - 1]
        l = dst.occ[diff.positions_right[0] - 1]
        if gamma.i == src.eta:
            val = table.h1(k, l)
        elif gamma.i < src.eta:
            chi = diff.common[gamma.i - 1]
            val = table.g(k, chi, l, chi) - table.g(k, chi, chi, l)
        else:
            raise MalformedGamma("single-difference selector beyond eta")
        return diff.sign * complex(val)
    x1, x2 = (src.occ[p - 1] for p in diff.positions_left)
    y1, y2 = (dst.occ[p - 1] for p in diff.positions_right)
    return diff.sign * complex(
        table.g(x1, x2, y1, y2) - table.g(x1, x2, y2, y1))


def gamma_entry(gamma: GammaIndex, alpha: Determinant,
                table: IntegralTable) -> OneSparseEntry | None:
    """The single matrix element of one labelled term in row alpha.

    Resolves the partner through the coloring; returns None when the
    color is INVALID for alpha (zero row, orbitals unchanged).
    """
    c = gamma.color
    if c.p == 0 and c.q == 0:
        return OneSparseEntry(
            alpha, alpha, term_value(gamma, alpha, alpha, None, table))
    beta = apply_color(c, alpha, LEFT)
    if beta is INVALID:
        return None
    diff = align_and_diff(alpha, beta)
    return OneSparseEntry(
        alpha, beta, term_value(gamma, alpha, beta, diff, table))


def gamma_matrix(gamma: GammaIndex, basis: list[Determinant],
                 table: IntegralTable, index: dict | None = None) -> np.ndarray:
    """Dense matrix of one labelled term: entries at (alpha, partner)."""
    if index is None:
        index = {d.occ: k for k, d in enumerate(basis)}
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for ia, det in enumerate(basis):
        entry = gamma_entry(gamma, det, table)
        if entry is not None:
            M[ia, index[entry.beta.occ]] += entry.value
    return M


def assemble_from_gammas(table: IntegralTable, eta: int) -> np.ndarray:
    """Sum of all labelled one-sparse terms; equals the CI matrix.

    Equivalent to accumulating gamma_entry over enumerate_gammas, but
    memoizes the one-move maps so the double-color sweep shares work,
    and reuses each resolved edge across its term selectors.
    """
    from .coloring import _alt1_ok, _apply_move

    norb = table.n
    basis = enumerate_basis(norb, eta)
    index = {d.occ: k for k, d in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)), dtype=complex)

    for ia, det in enumerate(basis):
        for sel_i in range(1, eta + 1):
            for sel_j in range(sel_i, eta + 1):
                H[ia, ia] += term_value(
                    GammaIndex(DIAGONAL_COLOR, sel_i, sel_j),
                    det, det, None, table)

    moves = movement_tuples(norb, eta)
    memo: dict = {}

    def step(move, occ):
        key = (move, occ)
        if key not in memo:
            memo[key] = _apply_move(*move, occ, LEFT, norb)
        return memo[key]

    for move in moves:
        color = ColorTuple(0, 0, 1, 0, *move)
        for ia, det in enumerate(basis):
            res = step(move, det.occ)
            if res is INVALID:
                continue
            beta = Determinant(res[0], norb)
            diff = align_and_diff(det, beta)
            ib = index[beta.occ]
            for sel in range(1, eta + 1):
                H[ia, ib] += term_value(
                    GammaIndex(color, sel, 0), det, beta, diff, table)

    for m1 in moves:
        for ia, det in enumerate(basis):
            r1 = step(m1, det.occ)
            if r1 is INVALID:
                continue
            chi, x1, y1 = r1
            for m2 in moves:
                r2 = step(m2, chi)
                if r2 is INVALID:
                    continue
                bocc, x2, y2 = r2
                if not _alt1_ok(x1, y1, x2, y2):
                    continue
                beta = Determinant(bocc, norb)
                diff = align_and_diff(det, beta)
                H[ia, index[bocc]] += term_value(
                    GammaIndex(ColorTuple(*m1, *m2)), det, beta, diff, table)
    return H


def gamma_census(norb: int, eta: int) -> dict:
    """Counts of the admissible label family, by family."""
    n_moves = 8 * eta * (norb - 1)
    return {
        "norb": norb,
        "eta": eta,
        "diagonal": eta * (eta + 1) // 2,
        "single": n_moves * eta,
        "double": n_moves**2,
        "total": count_gamma(norb, eta),
        "sparsity_d": sparsity_d(norb, eta),
    }
