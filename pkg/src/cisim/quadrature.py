"""Riemann-sum discretization of the molecular integrals with proven budgets.

Three integral families are discretized by midpoint sums over truncated
domains whose size and grid counts come from closed formulas in terms of
the certified basis envelope (phi_max, x_max, alpha, gamma1, gamma2):

    S0  (kinetic, gradient form)   1/2 int grad phi_i* . grad phi_j
    S1q (nuclear attraction)      -Z_q int phi_i* phi_j / |R_q - r|
    S2  (electron repulsion)       int phi_i*(1) phi_j*(2) phi_k(1) phi_l(2)
                                       / |r1 - r2|

For a requested accuracy delta the truncation half-width is
x_trunc = (2/alpha) x_max log(scale/delta) (1/alpha for S2), the grid is
grid_n = ceil((scale/delta) [(2/alpha) log(scale/delta)]^4) per axis
(exponent 7 and prefactor 1/alpha for S2), and every term's magnitude is
bounded a priori.  ``scale`` is K0 phi_max^2 x_max, K1 Z_q phi_max^2
x_max^2, or K2 phi_max^4 x_max^5 for the three kinds.  Requests outside
0 < delta <= e^{-alpha/2} scale (e^{-alpha} for S2) are rejected rather
than silently adjusted, as are grids beyond the configured per-axis cap.

S1 and S2 switch to spherical-polar grids that absorb the Coulomb
singularity into the volume element whenever the singularity can fall
inside the truncated box; the branch is picked by a distance test
against sqrt(3) x_trunc + x_max (2 sqrt(3) x_trunc + x_max for S2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import ceil, log, pi, sqrt

import numpy as np

from .errors import DeltaTooLarge, DeltaTooSmall, SpecMismatch
from .orbitals import BasisBounds, eval_gradient, eval_value

ZETA_PRIME = 2.0 * sqrt(3.0) + 3.0  # two-electron singular-branch geometry
DEFAULT_GRID_CAP = 256


def k0_constant(b: BasisBounds) -> float:
    a = b.alpha_decay
    return 26.0 * b.gamma1 / a**2 + 8.0 * pi * b.gamma2 / a**3 \
        + 32.0 * sqrt(3.0) * b.gamma1 * b.gamma2


def k1_constant(b: BasisBounds) -> float:
    a = b.alpha_decay
    return 8.0 * pi**2 * (a + 2.0) / a**3 \
        + 1121.0 * (8.0 * b.gamma1 + sqrt(2.0))


def k2_constant(b: BasisBounds) -> float:
    a = b.alpha_decay
    return 128.0 * pi * (a + 2.0) / a**6 \
        + 2161.0 * pi**2 * (20.0 * b.gamma1 + sqrt(2.0))


@dataclass(frozen=True)
class QuadratureSpec:
    """Everything needed to build one Riemann sum.

    mu = grid_n^3 for the three-dimensional kinds and grid_n^6 for S2;
    term_bound is the a-priori per-term magnitude bound.
    """

    kind: str                      # 's0' | 's1' | 's2'
    delta: float
    bounds: BasisBounds
    x_trunc: float
    grid_n: int
    mu: int
    coordinate_system: str         # 'cartesian' | 'spherical_polar'
    term_bound: float
    q: int | None = None           # nucleus index for S1
    zq: float = 0.0
    zeta_prime: float = ZETA_PRIME

    def compatible(self, other: "QuadratureSpec") -> bool:
        return (self.kind == other.kind and self.grid_n == other.grid_n
                and self.delta == other.delta and self.q == other.q)


class RiemannSum:
    """Sequence of midpoint terms: value array plus a shared magnitude bound.

    Behaves as a sequence of (rho, value, magnitude_bound) records;
    ``total`` reduces with exact (fsum) summation so reduction order
    cannot matter.
    """

    __slots__ = ("values", "bound", "spec")

    def __init__(self, values: np.ndarray, bound: float, spec: QuadratureSpec):
        self.values = np.asarray(values, dtype=complex)
        self.bound = float(bound)
        self.spec = spec

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        for rho, v in enumerate(self.values):
            yield RiemannTerm(rho, v, self.bound)

    def __getitem__(self, rho):
        return RiemannTerm(rho, self.values[rho], self.bound)

    @property
    def total(self) -> complex:
        return complex(math.fsum(self.values.real), math.fsum(self.values.imag))

    def max_term(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0


@dataclass(frozen=True)
class RiemannTerm:
    rho: int
    value: complex
    magnitude_bound: float


def _scale(kind: str, bounds: BasisBounds, zq: float = 1.0) -> float:
    if kind == "s0":
        return k0_constant(bounds) * bounds.phi_max**2 * bounds.x_max
    if kind == "s1":
        return k1_constant(bounds) * zq * bounds.phi_max**2 * bounds.x_max**2
    if kind == "s2":
        return k2_constant(bounds) * bounds.phi_max**4 * bounds.x_max**5
    raise ValueError(f"unknown kind {kind!r}")


def _log_factor(kind: str) -> tuple[float, int]:
    """(truncation prefactor multiplier of x_max/alpha, grid exponent)."""
    return (1.0, 7) if kind == "s2" else (2.0, 4)


def plan_quadrature(kind, i, j, delta, bounds, basis, nuclei=(), k=None, l=None,
                    q=None, grid_cap=DEFAULT_GRID_CAP) -> QuadratureSpec:
    """Build the prescribed grid plan for one integral.

    Checks the admissibility window for delta, computes the truncation
    half-width and per-axis grid count, chooses the cartesian or
    spherical-polar branch from the geometry, and records the per-term
    magnitude bound.
    """
    alpha = bounds.alpha_decay
    zq = 1.0
    if kind == "s1":
        if q is None:
            raise ValueError("s1 plans need a nucleus index q")
        zq = float(nuclei[q][0])
        if zq == 0.0:
            # zero charge: the integral is exactly zero; emit a trivial plan
            return QuadratureSpec(kind, delta, bounds, bounds.x_max, 1, 1,
                                  "cartesian", 0.0, q=q, zq=0.0)
    scale = _scale(kind, bounds, zq)
    edge = exp_edge(kind, alpha)
    if not 0.0 < delta <= edge * scale:
        raise DeltaTooLarge(
            f"delta={delta:g} outside admissible (0, {edge * scale:g}] for {kind}")
    pref, expn = _log_factor(kind)
    u = scale / delta
    x_trunc = (pref / alpha) * bounds.x_max * log(u)
    grid_n = ceil(u * ((pref / alpha) * log(u)) ** expn)
    if grid_n > grid_cap:
        raise DeltaTooSmall(
            f"delta={delta:g} needs grid_n={grid_n} > cap {grid_cap} for {kind}")
    dim = 6 if kind == "s2" else 3
    mu = grid_n**dim

    coord = "cartesian"
    if kind == "s1":
        ci = np.asarray(basis[i - 1].center)
        Rq = np.asarray(nuclei[q][1])
        if np.linalg.norm(Rq - ci) < sqrt(3.0) * x_trunc + bounds.x_max:
            coord = "spherical_polar"
        bnd = (256.0 * pi**2 / alpha**3) * zq * bounds.phi_max**2 \
            * bounds.x_max**2 * log(u) ** 3 / mu
    elif kind == "s0":
        bnd = (32.0 * bounds.gamma1**2 / alpha**3) * bounds.phi_max**2 \
            * bounds.x_max * log(u) ** 3 / mu
    else:
        ci = np.asarray(basis[i - 1].center)
        cj = np.asarray(basis[j - 1].center)
        if np.linalg.norm(ci - cj) < 2.0 * sqrt(3.0) * x_trunc + bounds.x_max:
            coord = "spherical_polar"
        bnd = (672.0 * pi**2 / alpha**6) * bounds.phi_max**4 \
            * bounds.x_max**5 * log(u) ** 6 / mu

    return QuadratureSpec(kind, delta, bounds, x_trunc, grid_n, mu, coord,
                          bnd, q=q, zq=zq)


def exp_edge(kind: str, alpha: float) -> float:
    """Admissibility factor: delta <= edge * scale."""
    return math.exp(-alpha) if kind == "s2" else math.exp(-alpha / 2.0)


def delta_for_grid(kind, grid_n, bounds, zq: float = 1.0) -> float:
    """Largest admissible delta whose plan uses at most grid_n per axis.

    Inverts the grid formula by bisection on u = scale/delta, where the
    per-axis count ceil(u ((pref/alpha) log u)^expn) is nondecreasing.
    """
    alpha = bounds.alpha_decay
    scale = _scale(kind, bounds, zq)
    pref, expn = _log_factor(kind)

    def count(u):
        return ceil(u * ((pref / alpha) * log(u)) ** expn)

    lo = 1.0 / exp_edge(kind, alpha)   # admissibility edge
    if count(lo) > grid_n:
        raise DeltaTooLarge(
            f"no admissible delta reaches grid_n <= {grid_n} for {kind}")
    hi = lo
    while count(hi * 2.0) <= grid_n:
        hi *= 2.0
    # bracket: hi feasible, 2*hi infeasible; find the largest feasible u
    top = hi * 2.0
    for _ in range(200):
        mid = 0.5 * (hi + top)
        if count(mid) <= grid_n:
            hi = mid
        else:
            top = mid
    return scale / hi


def _cube_centers(center, half_width, n) -> np.ndarray:
    """Cell centers of the n^3 partition of the cube C_halfwidth(center)."""
    k = np.arange(n)
    axis = (half_width / n) * (2 * k - (n - 1))
    g = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    return g.reshape(-1, 3) + np.asarray(center)


def _sphere_grid(n):
    """Midpoints of the (s, theta, phi) unit grid, each in (n^3,)."""
    s = (np.arange(n) + 0.5) / n
    th = (np.arange(n) + 0.5) * pi / n
    ph = (np.arange(n) + 0.5) * 2.0 * pi / n
    S, TH, PH = np.meshgrid(s, th, ph, indexing="ij")
    return S.ravel(), TH.ravel(), PH.ravel()


def _unit_vectors(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def riemann_S0(i, j, spec: QuadratureSpec, basis) -> RiemannSum:
    """Midpoint terms of 1/2 grad phi_i* . grad phi_j over C_x0(c_i)."""
    if spec.kind != "s0":
        raise SpecMismatch("spec kind is not s0")
    phi_i, phi_j = basis[i - 1], basis[j - 1]
    pts = _cube_centers(phi_i.center, spec.x_trunc, spec.grid_n)
    vol = (2.0 * spec.x_trunc / spec.grid_n) ** 3
    gi = eval_gradient(phi_i, pts)
    gj = eval_gradient(phi_j, pts)
    vals = 0.5 * np.sum(gi * gj, axis=-1) * vol
    if phi_i.spin != phi_j.spin:
        vals = np.zeros_like(vals)
    return RiemannSum(vals, spec.term_bound, spec)


def riemann_S1(i, j, q, spec: QuadratureSpec, basis, nuclei,
               force_branch: str | None = None) -> RiemannSum:
    """Midpoint terms of -Z_q phi_i* phi_j / |R_q - r|.

    Cartesian branch integrates over C_x1(c_i); the spherical-polar
    branch integrates over the ball B_{4 x1}(R_q) with the singularity
    absorbed into the volume form.  force_branch overrides the planned
    branch (used to test branch consistency near the threshold).
    """
    if spec.kind != "s1" or spec.q != q:
        raise SpecMismatch("spec does not match this s1 request")
    phi_i, phi_j = basis[i - 1], basis[j - 1]
    Zq, Rq = float(nuclei[q][0]), np.asarray(nuclei[q][1], dtype=float)
    if Zq == 0.0:
        return RiemannSum(np.zeros(spec.mu), 0.0, spec)
    branch = force_branch or spec.coordinate_system
    n = spec.grid_n
    x1 = spec.x_trunc
    if branch == "cartesian":
        pts = _cube_centers(phi_i.center, x1, n)
        vol = (2.0 * x1 / n) ** 3
        dist = np.linalg.norm(Rq - pts, axis=-1)
        vals = -Zq * eval_value(phi_i, pts) * eval_value(phi_j, pts) / dist * vol
    else:
        s, th, ph = _sphere_grid(n)
        pts = 4.0 * x1 * s[:, None] * _unit_vectors(th, ph) + Rq
        f1 = eval_value(phi_i, pts) * eval_value(phi_j, pts) * s * np.sin(th)
        vals = -16.0 * x1**2 * Zq * f1 * (2.0 * pi**2 / n**3)
    if phi_i.spin != phi_j.spin:
        vals = np.zeros_like(vals)
    return RiemannSum(vals, spec.term_bound, spec)


def riemann_S2(i, j, k, l, spec: QuadratureSpec, basis,
               force_branch: str | None = None) -> RiemannSum:
    """Midpoint terms of <ij|kl>: phi_i*(1) phi_j*(2) phi_k(1) phi_l(2) / r12.

    Electron 1 is truncated around c_i and electron 2 around c_j.  The
    cartesian branch uses the product of the two cubes; the
    spherical-polar branch parametrizes electron 1 in the cube and the
    separation vector in a ball of radius zeta' x2, absorbing the
    singularity into the volume form.
    """
    if spec.kind != "s2":
        raise SpecMismatch("spec kind is not s2")
    phi = [basis[x - 1] for x in (i, j, k, l)]
    spin_ok = phi[0].spin == phi[2].spin and phi[1].spin == phi[3].spin
    branch = force_branch or spec.coordinate_system
    n = spec.grid_n
    x2 = spec.x_trunc
    ci = np.asarray(phi[0].center, dtype=float)
    if branch == "cartesian":
        p1 = _cube_centers(phi[0].center, x2, n)
        p2 = _cube_centers(phi[1].center, x2, n)
        vol = (2.0 * x2 / n) ** 6
        f1 = eval_value(phi[0], p1) * eval_value(phi[2], p1)
        f2 = eval_value(phi[1], p2) * eval_value(phi[3], p2)
        dist = np.linalg.norm(p1[:, None, :] - p2[None, :, :], axis=-1)
        vals = (f1[:, None] * f2[None, :] / dist).ravel() * vol
    else:
        zp = spec.zeta_prime
        ax = (np.arange(n) + 0.5) * 2.0 / n - 1.0
        S1, S2_, S3 = np.meshgrid(ax, ax, ax, indexing="ij")
        svec = np.stack([S1, S2_, S3], axis=-1).reshape(-1, 3)
        t, th, ph = _sphere_grid(n)
        tvec = t[:, None] * _unit_vectors(th, ph)
        r1 = x2 * svec + ci
        eta_ik = eval_value(phi[0], r1) * eval_value(phi[2], r1)
        weight = t * np.sin(th)
        # r2 = r1 - zeta' x2 tvec, expanded over the (s, t) product grid
        r2 = r1[:, None, :] - zp * x2 * tvec[None, :, :]
        eta_jl = eval_value(phi[1], r2) * eval_value(phi[3], r2)
        f2 = eta_ik[:, None] * eta_jl * weight[None, :]
        vals = (zp**2 * x2**5 * f2).ravel() * (16.0 * pi**2 / n**6)
    if not spin_ok:
        vals = np.zeros_like(vals)
    return RiemannSum(vals, spec.term_bound, spec)


def hermitize(terms_ij: RiemannSum, terms_ji: RiemannSum) -> RiemannSum:
    """Term-wise (a + conj(b)) / 2, making each term Hermitian-symmetric."""
    if not terms_ij.spec.compatible(terms_ji.spec):
        raise SpecMismatch("term lists come from different plans")
    if len(terms_ij) != len(terms_ji):
        raise SpecMismatch("term lists differ in length")
    vals = 0.5 * (terms_ij.values + np.conj(terms_ji.values))
    return RiemannSum(vals, terms_ij.bound, terms_ij.spec)


def lambda_exact(mu_decay: float, x: float, c: float) -> tuple[float, float]:
    """Exact value and bound for the truncated screened-Coulomb integral.

    Lambda(c) = int_{|r| >= x} exp(-mu |r|) / |r - c| dr has the closed
    forms

        c <= x:  4 pi (x/mu + 1/mu^2) e^{-mu x}
        c >  x:  (4 pi / c) [ (x^2/mu + 2x/mu^2 + 2/mu^3) e^{-mu x}
                              - (c/mu^2 + 2/mu^3) e^{-mu c} ]

    and is bounded by (8 pi / mu^2) e^{-mu x / 2} in the first branch and
    (16 pi / (mu^3 c)) e^{-mu x / 2} in the second.
    """
    if mu_decay <= 0 or x <= 0:
        raise ValueError("mu and x must be positive")
    m = mu_decay
    if c <= x:
        exact = 4.0 * pi * (x / m + 1.0 / m**2) * math.exp(-m * x)
        bound = (8.0 * pi / m**2) * math.exp(-m * x / 2.0)
    else:
        exact = (4.0 * pi / c) * (
            (x**2 / m + 2.0 * x / m**2 + 2.0 / m**3) * math.exp(-m * x)
            - (c / m**2 + 2.0 / m**3) * math.exp(-m * c))
        bound = (16.0 * pi / (m**3 * c)) * math.exp(-m * x / 2.0)
    return exact, bound
