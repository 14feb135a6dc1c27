"""Unique reversible edge coloring of the CI connectivity graph.

Determinants differing in at most two orbitals are connected; simulation
runs on the bipartite double cover (an extra side label), so every color
must map a node on one side to at most one partner on the other side,
and the two directions must be mutual inverses.

A color is the 8-tuple (a1, b1, l1, p, a2, b2, l2, q).  Each 4-tuple
describes one orbital move: the occupied orbital shifts by p (signed,
not modular), l is its position in the sorted occupied list of either
the left node (a = 0) or the right node (a = 1), and b picks between
the at most two candidates the spacing rule leaves open.  A single
difference puts its move in the second 4-tuple with p = 0; p = q = 0 is
the diagonal family.  Two differences compose two moves through an
intermediate list, and only the composition that maps the smaller
differing orbital of the left node to the smaller differing orbital of
the right node first is accepted, so each edge keeps exactly one color.

Moving off either end of the occupied list uses the sentinel values 0
and N+1.  Whenever a shift leaves [1, N], collides with an occupied
orbital, or fails a spacing or back-check, the color is INVALID for
that node: the matrix element is zero and the node is unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .determinants import Determinant
from .errors import TooManyDifferences

LEFT = "left"
RIGHT = "right"


class _Invalid:
    __slots__ = ()

    def __repr__(self):
        return "INVALID"

    def __bool__(self):
        return False


INVALID = _Invalid()


@dataclass(frozen=True, slots=True)
class ColorTuple:
    a1: int
    b1: int
    l1: int
    p: int
    a2: int
    b2: int
    l2: int
    q: int


DIAGONAL_COLOR = ColorTuple(0, 0, 1, 0, 0, 0, 1, 0)


def _orb(occ: tuple, norb: int, i: int) -> int:
    if i == 0:
        return 0
    if i == len(occ) + 1:
        return norb + 1
    return occ[i - 1]


def _spacing(occ: tuple, norb: int, i: int) -> int:
    return _orb(occ, norb, i + 1) - _orb(occ, norb, i - 1)


def _replace_sorted(occ: tuple, pos: int, new_val: int) -> tuple[tuple, int]:
    """Drop occ[pos-1], insert new_val; returns the tuple and its new position."""
    vals = list(occ)
    del vals[pos - 1]
    k = 0
    while k < len(vals) and vals[k] < new_val:
        k += 1
    vals.insert(k, new_val)
    return tuple(vals), k + 1


def _find_alphas(beta: tuple, p: int, l: int, norb: int):
    """Candidates for the left node, given the right node.

    The moved orbital sits at position l of the left list; each
    candidate records (occ, moved_from, moved_to).  Spacing rule:
    accept only when the right list is at least as spread out around
    the move as the left list (ties belong to a = 0).
    """
    out = []
    eta = len(beta)
    for j in range(1, eta + 1):
        v = beta[j - 1] - p
        if p != 0 and not (1 <= v <= norb and v not in beta):
            continue
        if p == 0:
            cand, i = beta, j
        else:
            cand, i = _replace_sorted(beta, j, v)
        if i == l and _spacing(beta, norb, j) >= _spacing(cand, norb, i):
            out.append((cand, beta[j - 1], v))
    return out


def _find_betas(alpha: tuple, p: int, l: int, norb: int):
    """Mirror of _find_alphas with the strict spacing inequality (a = 1)."""
    out = []
    eta = len(alpha)
    for i in range(1, eta + 1):
        v = alpha[i - 1] + p
        if p != 0 and not (1 <= v <= norb and v not in alpha):
            continue
        if p == 0:
            cand, j = alpha, i
        else:
            cand, j = _replace_sorted(alpha, i, v)
        if j == l and _spacing(cand, norb, j) < _spacing(alpha, norb, i):
            out.append((cand, alpha[i - 1], v))
    return out


def _apply_move(a, b, l, shift, occ, side, norb):
    """One 4-tuple move; returns (new_occ, moved_from, moved_to) or INVALID.

    moved_from / moved_to are oriented left-to-right: the orbital value
    occupied in the left node and the value it becomes in the right
    node, regardless of which side the input node is on.
    """
    eta = len(occ)
    if not 1 <= l <= eta:
        return INVALID
    if a == 0 and side == RIGHT:
        # given the right node, search for left candidates
        cands = _find_alphas(occ, shift, l, norb)
        k = len(cands)
        if k == 0 or (k == 1 and b != 0) or b >= k:
            return INVALID
        cand, frm, to = cands[b]
        return cand, to, frm
    if a == 0 and side == LEFT:
        v = occ[l - 1] + shift
        if shift != 0 and not (1 <= v <= norb and v not in occ):
            return INVALID
        new, j = (occ, l) if shift == 0 else _replace_sorted(occ, l, v)
        if _spacing(new, norb, j) < _spacing(occ, norb, l):
            return INVALID
        cands = _find_alphas(new, shift, l, norb)
        k = len(cands)
        if (k == 1 and b == 0) or (k == 2 and b < k and cands[b][0] == occ):
            return new, occ[l - 1], v
        return INVALID
    if a == 1 and side == LEFT:
        cands = _find_betas(occ, shift, l, norb)
        k = len(cands)
        if k == 0 or (k == 1 and b != 0) or b >= k:
            return INVALID
        cand, frm, to = cands[b]
        return cand, frm, to
    # a == 1, side == RIGHT
    v = occ[l - 1] - shift
    if shift != 0 and not (1 <= v <= norb and v not in occ):
        return INVALID
    new, i = (occ, l) if shift == 0 else _replace_sorted(occ, l, v)
    if not _spacing(occ, norb, l) < _spacing(new, norb, i):
        return INVALID
    cands = _find_betas(new, shift, l, norb)
    k = len(cands)
    if (k == 1 and b == 0) or (k == 2 and b < k and cands[b][0] == occ):
        return new, v, occ[l - 1]
    return INVALID


def _alt1_ok(x1, y1, x2, y2) -> bool:
    """Accept only the canonical composition for a genuine double move.

    Rejects chained moves (which collapse to fewer than two differences)
    and any pairing other than smaller-to-smaller applied first.
    """
    return x2 != y1 and y2 != x1 and x1 < x2 and y1 < y2


def _apply_color_occ(c: ColorTuple, occ: tuple, side: str, norb: int):
    if c.p == 0 and c.q == 0:
        return occ
    if c.p == 0:
        res = _apply_move(c.a2, c.b2, c.l2, c.q, occ, side, norb)
        return res[0] if res is not INVALID else INVALID
    if side == LEFT:
        r1 = _apply_move(c.a1, c.b1, c.l1, c.p, occ, LEFT, norb)
        if r1 is INVALID:
            return INVALID
        chi, x1, y1 = r1
        r2 = _apply_move(c.a2, c.b2, c.l2, c.q, chi, LEFT, norb)
        if r2 is INVALID:
            return INVALID
        beta, x2, y2 = r2
        return beta if _alt1_ok(x1, y1, x2, y2) else INVALID
    r2 = _apply_move(c.a2, c.b2, c.l2, c.q, occ, RIGHT, norb)
    if r2 is INVALID:
        return INVALID
    chi, x2, y2 = r2
    r1 = _apply_move(c.a1, c.b1, c.l1, c.p, chi, RIGHT, norb)
    if r1 is INVALID:
        return INVALID
    alpha, x1, y1 = r1
    return alpha if _alt1_ok(x1, y1, x2, y2) else INVALID


# ---------------------------------------------------------------------------
# public operations on Determinant values


def find_alphas(beta: Determinant, p: int, l: int) -> list[Determinant]:
    return [Determinant(c, beta.norb)
            for c, _, _ in _find_alphas(beta.occ, p, l, beta.norb)]


def find_betas(alpha: Determinant, p: int, l: int) -> list[Determinant]:
    return [Determinant(c, alpha.norb)
            for c, _, _ in _find_betas(alpha.occ, p, l, alpha.norb)]


def apply_single(a, b, l, shift, node: Determinant, side: str):
    res = _apply_move(a, b, l, shift, node.occ, side, node.norb)
    if res is INVALID:
        return INVALID
    return Determinant(res[0], node.norb)


def apply_color(color: ColorTuple, node: Determinant, side: str):
    res = _apply_color_occ(color, node.occ, side, node.norb)
    if res is INVALID:
        return INVALID
    return Determinant(res, node.norb)


def _single_color_parts(src: tuple, dst: tuple, norb: int):
    """(a, b, l, shift) of the unique move src -> dst (one difference)."""
    x = next(v for v in src if v not in dst)
    y = next(v for v in dst if v not in src)
    i = src.index(x) + 1
    j = dst.index(y) + 1
    shift = y - x
    if _spacing(dst, norb, j) >= _spacing(src, norb, i):
        a, l = 0, i
        cands = _find_alphas(dst, shift, l, norb)
        b = next(k for k, (c, _, _) in enumerate(cands) if c == src)
    else:
        a, l = 1, j
        cands = _find_betas(src, shift, l, norb)
        b = next(k for k, (c, _, _) in enumerate(cands) if c == dst)
    return a, b, l, shift


def color_of(alpha: Determinant, beta: Determinant) -> ColorTuple:
    """The unique color connecting an ordered pair (left, right)."""
    aocc, bocc, norb = alpha.occ, beta.occ, alpha.norb
    only_a = sorted(set(aocc) - set(bocc))
    only_b = sorted(set(bocc) - set(aocc))
    count = len(only_a)
    if count > 2:
        raise TooManyDifferences(f"{count} differing orbitals")
    if count == 0:
        return DIAGONAL_COLOR
    if count == 1:
        a, b, l, shift = _single_color_parts(aocc, bocc, norb)
        return ColorTuple(0, 0, 1, 0, a, b, l, shift)
    chi, _ = _replace_sorted(aocc, aocc.index(only_a[0]) + 1, only_b[0])
    a1, b1, l1, p = _single_color_parts(aocc, chi, norb)
    a2, b2, l2, q = _single_color_parts(chi, bocc, norb)
    return ColorTuple(a1, b1, l1, p, a2, b2, l2, q)


# ---------------------------------------------------------------------------
# color family enumeration and the exhaustive census


def movement_tuples(norb: int, eta: int):
    """All (a, b, l, shift) with a nonzero shift."""
    shifts = [s for s in range(-(norb - 1), norb) if s != 0]
    return [(a, b, l, s)
            for a in (0, 1) for b in (0, 1)
            for l in range(1, eta + 1) for s in shifts]


def single_colors(norb: int, eta: int):
    return [ColorTuple(0, 0, 1, 0, a, b, l, s)
            for a, b, l, s in movement_tuples(norb, eta)]


def double_colors(norb: int, eta: int):
    moves = movement_tuples(norb, eta)
    return [ColorTuple(*m1, *m2) for m1 in moves for m2 in moves]


@dataclass
class ColoringCensus:
    norb: int
    eta: int
    n_nodes: int
    n_single_colors: int
    n_double_colors: int
    edges_expected: int
    edges_found: int
    duplicate_edges: int
    uncovered_edges: int
    inverse_failures: int
    injectivity_failures: int

    @property
    def valid(self) -> bool:
        return (self.duplicate_edges == 0 and self.uncovered_edges == 0
                and self.inverse_failures == 0
                and self.injectivity_failures == 0
                and self.edges_found == self.edges_expected)


def coloring_census(norb: int, eta: int) -> ColoringCensus:
    """Exhaustively verify uniqueness, coverage, reversibility, injectivity.

    Walks every color against every node on both sides, memoizing the
    one-move maps so the double-color sweep stays quadratic in moves,
    not in (moves x nodes).
    """
    dets = [occ for occ in itertools.combinations(range(1, norb + 1), eta)]
    index = {occ: i for i, occ in enumerate(dets)}
    moves = movement_tuples(norb, eta)

    memo_left: dict[tuple, object] = {}
    memo_right: dict[tuple, object] = {}

    def step(move, occ, side):
        memo = memo_left if side == LEFT else memo_right
        key = (move, occ)
        if key not in memo:
            memo[key] = _apply_move(*move, occ, side, norb)
        return memo[key]

    pair_count = [[0] * len(dets) for _ in dets]
    inverse_failures = 0
    injectivity_failures = 0

    # diagonal family: one canonical color covering every (alpha, alpha)
    for i in range(len(dets)):
        pair_count[i][i] += 1

    for move in moves:
        seen = set()
        for occ in dets:
            res = step(move, occ, LEFT)
            if res is INVALID:
                continue
            tgt = res[0]
            pair_count[index[occ]][index[tgt]] += 1
            if tgt in seen:
                injectivity_failures += 1
            seen.add(tgt)
            back = step(move, tgt, RIGHT)
            if back is INVALID or back[0] != occ:
                inverse_failures += 1

    for m1 in moves:
        for occ in dets:
            r1 = step(m1, occ, LEFT)
            if r1 is INVALID:
                continue
            chi, x1, y1 = r1
            for m2 in moves:
                r2 = step(m2, chi, LEFT)
                if r2 is INVALID:
                    continue
                beta, x2, y2 = r2
                if not _alt1_ok(x1, y1, x2, y2):
                    continue
                pair_count[index[occ]][index[beta]] += 1
                # reverse pass through the same color
                b2 = step(m2, beta, RIGHT)
                ok = False
                if b2 is not INVALID and b2[0] == chi:
                    b1 = step(m1, chi, RIGHT)
                    ok = b1 is not INVALID and b1[0] == occ
                if not ok:
                    inverse_failures += 1

    duplicates = 0
    uncovered = 0
    found = 0
    expected = 0
    for ia, aocc in enumerate(dets):
        for ib, bocc in enumerate(dets):
            diff = len(set(aocc) - set(bocc))
            c = pair_count[ia][ib]
            if diff <= 2:
                expected += 1
                if c == 0:
                    uncovered += 1
                else:
                    found += 1
                    if c > 1:
                        duplicates += 1
            elif c != 0:
                duplicates += 1

    return ColoringCensus(
        norb=norb, eta=eta, n_nodes=len(dets),
        n_single_colors=len(moves),
        n_double_colors=len(moves) ** 2,
        edges_expected=expected, edges_found=found,
        duplicate_edges=duplicates, uncovered_edges=uncovered,
        inverse_failures=inverse_failures,
        injectivity_failures=injectivity_failures,
    )
