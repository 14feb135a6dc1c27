"""Truncated-Taylor-series evolution over an equal-weight unitary sum.

The Hamiltonian enters as a family of Hermitian signed involutions,
H = zeta sum_{l=1..L} sum_{rho=1..mu} H_{l, rho} with l = (s, m, gamma),
held column-compressed by :class:`TermFamily`.  Evolution for time t is
split into r = ceil(zeta L mu t / ln 2) segments; each segment applies
the Taylor expansion of exp(-i H t / r) truncated at order K through
the walk operator

    W = (B^+ x 1) select(V) (B x 1),   <0|W|0> = U~ / lambda,

followed by one round of oblivious amplitude amplification
G = -W (1 - 2P) W^+ (1 - 2P) W, whose projected action is
(3/lambda) U~ - (4/lambda^3) U~ U~^+ U~ and reduces to U~ itself when
lambda = 2 and U~ is unitary.

Two interchangeable executions are provided: a dense-block path that
works with U~ as a matrix on the system alone, and a register-level
path that simulates the unary k register, the K (l, rho) selection
registers and the system explicitly.  They agree wherever both run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, factorial, log

import numpy as np

from .coloring import INVALID, LEFT, apply_color
from .determinants import Determinant
from .errors import BudgetInfeasible
from .selfinverse import DecompositionMeta, SelfInverseTerm, term_arrays

LN2 = log(2.0)


class TermFamily:
    """Column-compressed equal-weight term family on a dim-state system.

    One involution ``perms[g]`` per one-sparse label and a value array
    ``values[g]`` of shape (dim, mu) holding the grid-point entries at
    (x, perms[g][x]).  Rounding to multiples of 2 zeta and the
    threshold split into 2 M signed involutions happen here, so the
    family exposes every H_{l, rho} without materializing them.
    """

    def __init__(self, perms, values, zeta: float, gammas=None):
        self.perms = [np.asarray(p) for p in perms]
        self.values = [np.atleast_2d(np.asarray(v, dtype=complex)) for v in values]
        self.zeta = float(zeta)
        self.gammas = list(gammas) if gammas is not None else list(range(len(perms)))
        if not self.perms:
            raise ValueError("empty term family")
        self.dim = len(self.perms[0])
        self.mu = max(v.shape[1] for v in self.values)
        # pad every label to the global grid size
        self.values = [
            np.pad(v, ((0, 0), (0, self.mu - v.shape[1]))) for v in self.values
        ]
        self._C = []
        self._phase = []
        cmax = 1
        for v in self.values:
            mod = np.abs(v)
            C = (2.0 * np.round(mod / (2.0 * self.zeta))).astype(np.int64)
            phase = np.where(mod > 0, v / np.where(mod > 0, mod, 1.0), 1.0)
            self._C.append(C)
            self._phase.append(phase.astype(complex))
            if C.size:
                cmax = max(cmax, int(C.max()))
        self.M = cmax
        self.meta = DecompositionMeta(zeta=self.zeta, M=self.M,
                                      n_gamma=len(self.perms), mu=self.mu)

    @property
    def L(self) -> int:
        return self.meta.L

    def ell_parts(self, ell: int) -> tuple[int, int, int]:
        """Unpack a flat l in 0..L-1 into (s, m, gamma index)."""
        s = ell % 2 + 1
        m = (ell // 2) % self.M + 1
        g = ell // (2 * self.M)
        return s, m, g

    def flat_ell(self, s: int, m: int, g: int) -> int:
        """Pack (s in 1..2, m in 1..M, gamma index) into a flat l."""
        return (g * self.M + (m - 1)) * 2 + (s - 1)

    def term(self, ell: int, rho: int) -> SelfInverseTerm:
        s, m, g = self.ell_parts(ell)
        perm, vals = term_arrays(self.perms[g], self._C[g][:, rho],
                                 self._phase[g][:, rho], m, s)
        return SelfInverseTerm(self.gammas[g], rho, m, s, perm, vals)

    def apply_term(self, ell: int, rho: int, psi: np.ndarray) -> np.ndarray:
        """H_{l, rho} psi without building the matrix."""
        s, m, g = self.ell_parts(ell)
        on = self._C[g][:, rho] >= 2 * m
        fill = 1.0 if s == 1 else -1.0
        vals = np.where(on, self._phase[g][:, rho], fill + 0.0j)
        # row x of the matrix holds vals[x] at column perm[x]
        return vals * psi[self.perms[g]]

    def rounded_dense(self) -> np.ndarray:
        """zeta sum_{l, rho} H_{l, rho}: the rounded Hamiltonian, dense."""
        H = np.zeros((self.dim, self.dim), dtype=complex)
        rows = np.arange(self.dim)
        for g, perm in enumerate(self.perms):
            rounded = self.zeta * self._C[g] * self._phase[g]
            np.add.at(H, (rows, perm), rounded.sum(axis=1))
        return H

    def sum_of_terms(self) -> np.ndarray:
        """sum_{l, rho} H_{l, rho} = rounded_dense() / zeta."""
        return self.rounded_dense() / self.zeta


@dataclass(frozen=True)
class SegmentPlan:
    r: int
    K: int
    zeta: float
    L: int
    mu: int
    lam: float
    t: float
    eps: float

    @property
    def x(self) -> float:
        """Per-segment weight zeta L mu t / r; at most ln 2."""
        return self.zeta * self.L * self.mu * self.t / self.r

    @property
    def taylor_tail(self) -> float:
        return LN2 ** (self.K + 1) / factorial(self.K + 1)

    @property
    def ancilla_qubits(self) -> int:
        """Selection-register width: unary k plus K binary (l, rho) slots."""
        return self.K * (1 + max(1, ceil(np.log2(max(self.L, 2))))
                         + max(1, ceil(np.log2(max(self.mu, 2)))))


def plan_segments(h_norm_bound: float, t: float, eps: float,
                  meta: DecompositionMeta) -> SegmentPlan:
    """Segment count and truncation order for a target accuracy.

    r = ceil(zeta L mu t / ln 2) makes the per-segment weight at most
    ln 2 (and zeta L mu bounds the Hamiltonian norm, so r >= |H| t);
    K is the smallest order with (ln 2)^{K+1} / (K+1)! <= eps / (2 r).
    """
    if not 0.0 < eps < 1.0:
        raise BudgetInfeasible(f"eps={eps} outside (0, 1)")
    if t < 0.0:
        raise ValueError("negative time")
    weight = meta.lambda_weight
    if weight < h_norm_bound - 1e-9:
        raise ValueError("term family cannot bound the Hamiltonian norm")
    r = max(1, ceil(weight * t / LN2))
    K = 1
    while LN2 ** (K + 1) / factorial(K + 1) > eps / (2.0 * r):
        K += 1
        if K > 200:
            raise BudgetInfeasible("truncation order would exceed 200")
    x = weight * t / r
    lam = sum(x**k / factorial(k) for k in range(K + 1))
    return SegmentPlan(r=r, K=K, zeta=meta.zeta, L=meta.L, mu=meta.mu,
                       lam=lam, t=t, eps=eps)


# ---------------------------------------------------------------------------
# oracles


def q_col(color, node: Determinant, side: str = LEFT) -> Determinant:
    """Partner determinant under a color; the node itself when INVALID."""
    res = apply_color(color, node, side)
    return node if res is INVALID else res


def encode_det(det: Determinant) -> int:
    """Pack occupied orbitals into eta fields of ceil(log2(N+1)) bits."""
    width = max(1, (det.norb).bit_length())
    out = 0
    for k in det.occ:
        out = (out << width) | k
    return out


def q_col_xor(color, node: Determinant, scratch: int, side: str = LEFT) -> int:
    """XOR the partner's encoding into a scratch register."""
    return scratch ^ encode_det(q_col(color, node, side))


def is_valid_occ(occ, norb: int) -> bool:
    return (len(occ) >= 1 and all(1 <= v <= norb for v in occ)
            and all(a < b for a, b in zip(occ, occ[1:])))


def q_val(family: TermFamily, ell: int, rho: int, row: int, col: int,
          row_occ=None, col_occ=None, norb: int = 0) -> complex:
    """Entry of H_{l, rho} at (row, col); zero off the sparsity pattern.

    When raw orbital lists are supplied, entries between distinct nodes
    vanish if either list is not a valid determinant, so no amplitude
    ever flows into Pauli-forbidden configurations.
    """
    if row_occ is not None and row != col:
        if not (is_valid_occ(row_occ, norb) and is_valid_occ(col_occ, norb)):
            return 0.0
    return complex(family.term(ell, rho).entry(row, col))


def select_h(family: TermFamily, ell: int, rho: int, psi: np.ndarray) -> np.ndarray:
    """psi -> H_{l, rho} psi (the select oracle's system action)."""
    return family.apply_term(ell, rho, psi)


def select_h_with_scratch(family: TermFamily, ell: int, rho: int,
                          joint: np.ndarray, encodings: np.ndarray) -> np.ndarray:
    """select on (system x scratch) through the four-step oracle walk.

    ``joint`` has shape (dim, 2^W); ``encodings[x]`` is the W-bit code
    of node x.  The walk XORs the partner's code into the scratch,
    picks up the +-1 entry, swaps the two registers, and uncomputes by
    a second partner XOR, so a state entering with scratch |0> leaves
    with scratch |0> and the system multiplied by H_{l, rho}.
    """
    term = family.term(ell, rho)
    dim = family.dim
    code_to_node = {int(c): x for x, c in enumerate(encodings)}
    width = joint.shape[1]
    out = np.zeros_like(joint)
    for x in range(dim):
        y = int(term.perm[x])
        for s in range(width):
            amp = joint[x, s]
            if amp == 0.0:
                continue
            s1 = s ^ int(encodings[y])          # compute partner code
            amp = amp * term.vals[x]            # value oracle phase
            node2 = code_to_node.get(s1)        # swap system <-> scratch
            if node2 is None:
                continue                        # unreachable on clean input
            s2 = int(encodings[x])
            s3 = s2 ^ int(encodings[int(term.perm[node2])])  # uncompute
            out[node2, s3] += amp
    return out


# ---------------------------------------------------------------------------
# dense-block path


def taylor_block(family: TermFamily, plan: SegmentPlan) -> np.ndarray:
    """U~ = sum_{k<=K} (-i t / r)^k / k! Htilde^k as a dense matrix."""
    H = family.rounded_dense()
    dim = family.dim
    U = np.eye(dim, dtype=complex)
    coef = -1j * plan.t / plan.r
    # Horner evaluation of the truncated exponential series
    for k in range(plan.K, 0, -1):
        U = np.eye(dim, dtype=complex) + (coef / k) * (H @ U)
    return U


def prepare_b(plan: SegmentPlan) -> np.ndarray:
    """Unary-register amplitudes sqrt(w_k / lambda), w_k = x^k / k!."""
    w = np.array([plan.x**k / factorial(k) for k in range(plan.K + 1)])
    return np.sqrt(w / w.sum())


def oaa_block(U: np.ndarray, lam: float) -> np.ndarray:
    """Projected amplified segment: (3/lam) U - (4/lam^3) U U^+ U."""
    return (3.0 / lam) * U - (4.0 / lam**3) * (U @ U.conj().T @ U)


@dataclass
class EvolutionInfo:
    r: int
    K: int
    lam: float
    per_segment_deviation: list = field(default_factory=list)

    @property
    def total_deviation(self) -> float:
        return float(sum(self.per_segment_deviation))


def oaa_segment(segment_op: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply one amplified segment and renormalize, returning the deviation."""
    out = segment_op @ psi
    norm = float(np.linalg.norm(out))
    return out / norm, abs(1.0 - norm)


def evolve(family: TermFamily, psi0: np.ndarray, t: float, eps: float,
           h_norm_bound: float | None = None):
    """r amplified segments of the truncated-Taylor walk, dense path."""
    if eps <= 1e-10:
        raise BudgetInfeasible(f"eps={eps} at or below the 1e-10 numeric floor")
    psi = np.asarray(psi0, dtype=complex).copy()
    if t == 0.0:
        return psi, EvolutionInfo(r=0, K=0, lam=1.0)
    if h_norm_bound is None:
        h_norm_bound = float(np.linalg.norm(family.rounded_dense(), 2))
    plan = plan_segments(h_norm_bound, t, eps, family.meta)
    U = taylor_block(family, plan)
    seg = oaa_block(U, plan.lam)
    info = EvolutionInfo(r=plan.r, K=plan.K, lam=plan.lam)
    for _ in range(plan.r):
        psi, dev = oaa_segment(seg, psi)
        info.per_segment_deviation.append(dev)
    return psi, info


# ---------------------------------------------------------------------------
# register-level path


def _householder_to(target: np.ndarray) -> np.ndarray:
    """Unitary (real-orthogonal for real targets) sending e0 to target."""
    n = len(target)
    t = np.asarray(target, dtype=complex)
    t = t / np.linalg.norm(t)
    w = np.zeros(n, dtype=complex)
    w[0] = 1.0
    w = w - t
    nrm2 = np.vdot(w, w).real
    if nrm2 < 1e-30:
        return np.eye(n, dtype=complex)
    return np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj()) / nrm2


class RegisterSim:
    """Explicit state-vector walk on (k unary) x (l, rho registers) x system.

    The unary register is a (K+1)-level axis holding |1^k 0^{K-k}>;
    each of the K selection slots carries one L-level and one mu-level
    register.  B is the tensor product of a unitary completing the
    sqrt(w_k / lambda) column on the unary axis with uniform-column
    unitaries on every selection register.
    """

    def __init__(self, family: TermFamily, plan: SegmentPlan):
        self.family = family
        self.plan = plan
        self.K = plan.K
        self.L = family.L
        self.mu = family.mu
        self.dim = family.dim
        self.shape = (self.K + 1,) + (self.L,) * self.K \
            + (self.mu,) * self.K + (self.dim,)
        self._bk = _householder_to(prepare_b(plan))
        self._bl = _householder_to(np.full(self.L, 1.0 / np.sqrt(self.L)))
        self._br = _householder_to(np.full(self.mu, 1.0 / np.sqrt(self.mu)))

    def zero_state(self, psi: np.ndarray) -> np.ndarray:
        """Embed a system vector, or a (dim, batch) stack of them."""
        psi = np.asarray(psi, dtype=complex)
        state = np.zeros(self.shape + psi.shape[1:], dtype=complex)
        state[(0,) * (2 * self.K + 1) + (Ellipsis,)] = psi
        return state

    def _apply_axis(self, state, U, axis):
        return np.moveaxis(
            np.tensordot(U, np.moveaxis(state, axis, 0), axes=(1, 0)), 0, axis)

    def apply_b(self, state, dagger=False):
        Uk = self._bk.conj().T if dagger else self._bk
        Ul = self._bl.conj().T if dagger else self._bl
        Ur = self._br.conj().T if dagger else self._br
        state = self._apply_axis(state, Uk, 0)
        for slot in range(self.K):
            state = self._apply_axis(state, Ul, 1 + slot)
            state = self._apply_axis(state, Ur, 1 + self.K + slot)
        return state

    def _term_batch(self, ell, rho, block, sign, bn):
        """sign * term action on a block; bn trailing batch axes."""
        s, m, g = self.family.ell_parts(ell)
        fam = self.family
        on = fam._C[g][:, rho] >= 2 * m
        fill = 1.0 if s == 1 else -1.0
        vals = np.where(on, fam._phase[g][:, rho], fill + 0.0j)
        sys_ax = block.ndim - 1 - bn
        moved = np.moveaxis(block, sys_ax, -1)
        out = sign * moved[..., fam.perms[g]] * vals
        return np.moveaxis(out, -1, sys_ax)

    def apply_select_v(self, state):
        """(-i)^k H_{l_1, rho_1} ... H_{l_k, rho_k}, controlled on unary k."""
        bn = state.ndim - len(self.shape)
        out = state.copy()
        for slot in range(self.K):
            ell_ax = 1 + slot
            rho_ax = 1 + self.K + slot
            new = out.copy()
            for k in range(slot + 1, self.K + 1):
                for ell in range(self.L):
                    for rho in range(self.mu):
                        idx = [slice(None)] * len(self.shape)
                        idx[0] = k
                        idx[ell_ax] = ell
                        idx[rho_ax] = rho
                        idx = tuple(idx)
                        new[idx] = self._term_batch(ell, rho, out[idx], -1j, bn)
            out = new
        return out

    def apply_w(self, state, dagger=False):
        if dagger:
            state = self.apply_b(state, dagger=False)
            state = self._select_v_dagger(state)
            return self.apply_b(state, dagger=True)
        state = self.apply_b(state)
        state = self.apply_select_v(state)
        return self.apply_b(state, dagger=True)

    def _select_v_dagger(self, state):
        bn = state.ndim - len(self.shape)
        out = state.copy()
        for slot in range(self.K - 1, -1, -1):
            ell_ax = 1 + slot
            rho_ax = 1 + self.K + slot
            new = out.copy()
            for k in range(slot + 1, self.K + 1):
                for ell in range(self.L):
                    for rho in range(self.mu):
                        idx = [slice(None)] * len(self.shape)
                        idx[0] = k
                        idx[ell_ax] = ell
                        idx[rho_ax] = rho
                        idx = tuple(idx)
                        # terms are involutions; the dagger restores +i
                        new[idx] = self._term_batch(ell, rho, out[idx], 1j, bn)
            out = new
        return out

    def project_zero(self, state):
        out = np.zeros_like(state)
        sel = (0,) * (2 * self.K + 1) + (Ellipsis,)
        out[sel] = state[sel]
        return out

    def reflect(self, state):
        """(1 - 2P) state."""
        return state - 2.0 * self.project_zero(state)

    def block_of_w(self) -> np.ndarray:
        """<0|W|0> as a dim x dim matrix, all columns in one pass."""
        state = self.zero_state(np.eye(self.dim, dtype=complex))
        sel = (0,) * (2 * self.K + 1) + (Ellipsis,)
        return self.apply_w(state)[sel]

    def oaa_apply(self, psi: np.ndarray) -> np.ndarray:
        """P G |0, psi> block: the register-level amplified segment."""
        state = self.apply_w(self.zero_state(psi))
        state = self.reflect(state)
        state = self.apply_w(state, dagger=True)
        state = self.reflect(state)
        state = self.apply_w(state)
        sel = (0,) * (2 * self.K + 1) + (Ellipsis,)
        return -state[sel]
