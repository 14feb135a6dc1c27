import itertools

import pytest

from cisim.determinants import (Determinant, align_and_diff, basis_size,
                                determinant_at, enumerate_basis, index_of,
                                make_determinant, sort_with_parity)
from cisim.errors import DuplicateOrbital, IndexOutOfRange, InvalidCounts

from conftest import inversion_parity


def test_make_determinant_sorted():
    det, sign = make_determinant([1, 2, 3], 4)
    assert det.occ == (1, 2, 3) and sign == +1


def test_make_determinant_one_swap():
    det, sign = make_determinant([2, 1, 3], 4)
    assert det.occ == (1, 2, 3) and sign == -1


def test_make_determinant_parity_oracle():
    # [3,1,2] has two inversions; cross-check with the brute-force count
    det, sign = make_determinant([3, 1, 2], 4)
    assert det.occ == (1, 2, 3)
    assert sign == inversion_parity([3, 1, 2]) == +1


def test_sort_parity_matches_oracle_exhaustive():
    for perm in itertools.permutations([1, 2, 3, 4]):
        _, sign = sort_with_parity(perm)
        assert sign == inversion_parity(perm)


def test_make_determinant_errors():
    with pytest.raises(DuplicateOrbital):
        make_determinant([1, 1, 2], 4)
    with pytest.raises(IndexOutOfRange):
        make_determinant([0, 2], 4)
    with pytest.raises(IndexOutOfRange):
        make_determinant([2, 5], 4)


def test_enumerate_basis_4_2():
    dets = enumerate_basis(4, 2)
    assert len(dets) == 6 == basis_size(4, 2)
    assert dets[0].occ == (1, 2) and dets[-1].occ == (3, 4)
    assert [d.occ for d in dets] == sorted(d.occ for d in dets)


def test_enumerate_basis_edges():
    assert [d.occ for d in enumerate_basis(3, 3)] == [(1, 2, 3)]
    assert [d.occ for d in enumerate_basis(4, 1)] == [(1,), (2,), (3,), (4,)]
    with pytest.raises(InvalidCounts):
        enumerate_basis(3, 4)
    with pytest.raises(InvalidCounts):
        enumerate_basis(3, 0)


@pytest.mark.parametrize("norb,eta", [(4, 2), (6, 3), (8, 4), (7, 1)])
def test_rank_unrank_inverse(norb, eta):
    dets = enumerate_basis(norb, eta)
    for i, det in enumerate(dets):
        assert index_of(det) == i
        assert determinant_at(i, norb, eta).occ == det.occ


def test_sentinel_accessors():
    det = Determinant((2, 5), 6)
    assert det.orb(0) == 0
    assert det.orb(1) == 2
    assert det.orb(2) == 5
    assert det.orb(3) == 7


def test_align_identity():
    a = Determinant((1, 2), 4)
    rep = align_and_diff(a, a)
    assert rep.count == 0 and rep.sign == +1 and rep.common == (1, 2)


def test_align_single_difference():
    rep = align_and_diff(Determinant((1, 2, 5), 6), Determinant((1, 3, 5), 6))
    assert rep.count == 1
    assert rep.positions_left == (2,) and rep.positions_right == (2,)
    assert rep.common == (1, 5)


def _alignment_sign_oracle(left, right):
    """Parity of the permutation carrying sorted(right) onto the aligned list."""
    lset, rset = set(left.occ), set(right.occ)
    only_left = [o for o in left.occ if o not in rset]
    only_right = [o for o in right.occ if o not in lset]
    replace = dict(zip(sorted(only_left), sorted(only_right)))
    aligned = [replace.get(o, o) for o in left.occ]
    order = {o: i for i, o in enumerate(right.occ)}
    return inversion_parity([order[o] for o in aligned])


def test_align_double_difference_sign_oracle():
    a, b = Determinant((1, 2), 4), Determinant((3, 4), 4)
    rep = align_and_diff(a, b)
    assert rep.count == 2
    assert rep.sign == _alignment_sign_oracle(a, b)


def test_align_sign_matches_oracle_everywhere():
    dets = enumerate_basis(6, 3)
    for a in dets:
        for b in dets:
            rep = align_and_diff(a, b)
            if rep.count <= 2:
                assert rep.sign == _alignment_sign_oracle(a, b)


def test_align_symmetry_and_set_oracle():
    for norb, eta in [(6, 2), (8, 4)]:
        dets = enumerate_basis(norb, eta)
        for a in dets:
            for b in dets:
                rep = align_and_diff(a, b)
                rev = align_and_diff(b, a)
                assert rep.count == rev.count == len(set(a.occ) - set(b.occ))
                assert rep.positions_left == rev.positions_right
                if rep.count <= 2:
                    assert rep.sign == rev.sign
