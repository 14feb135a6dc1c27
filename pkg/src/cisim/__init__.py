"""Desk-scale CI-matrix quantum-simulation pipeline with built-in oracles."""

from .determinants import (Determinant, DiffReport, align_and_diff,
                           determinant_at, enumerate_basis, index_of,
                           make_determinant)
from .orbitals import BasisBounds, SpinOrbital, derive_bounds, eval_orbital
from .integrals import IntegralTable, reference_integral
from .coloring import (INVALID, LEFT, RIGHT, ColorTuple, apply_color,
                       apply_single, color_of, coloring_census, find_alphas,
                       find_betas)
from .cimatrix import (GammaIndex, OneSparseEntry, ci_entry, count_gamma,
                       enumerate_gammas, gamma_entry, sparsity_d)
from .quadrature import (QuadratureSpec, RiemannTerm, hermitize, lambda_exact,
                         plan_quadrature, riemann_S0, riemann_S1, riemann_S2)
from .selfinverse import (DecompositionMeta, SelfInverseTerm, decompose,
                          decompose_dense, remove_zeros, round_aleph, split_C)
from .lcu import RegisterSim, SegmentPlan, TermFamily, evolve, plan_segments
from .driver import (ProblemConfig, RunReport, budget_errors, exact_evolve,
                     load_config, run_pipeline)

__version__ = "0.1.0"
