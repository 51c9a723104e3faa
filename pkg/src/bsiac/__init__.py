"""Deterministic and Bayesian SIAC filtering.

Central B-spline kernels, their matrix representation on periodic meshes,
a hierarchical Bayesian model built on the filter, block-coordinate MAP
estimation, a Gibbs sampler and the supporting diagnostics.
"""

__version__ = "0.1.0"

from .bspline import bspline_eval, bspline_knots, bspline_moment
from .kernel import ScaledKernel, SiacKernelSpec, build_kernel, filter_function, kernel_eval
from .mesh import Layout, UniformPeriodicMesh, build_mesh
from .filter_matrix import FilterMatrix, build_filter_matrix, filter_apply
from .operators import (
    DenseOperator,
    IdentityOperator,
    KroneckerOperator,
    LinearOperator,
    gaussian_blur_1d,
    identity_operator,
    kron_separable,
    unvec,
    vec,
)
from .datasets import SyntheticDataset, make_dataset
from .posterior import BayesSiacModel, HyperPriors, check_common_kernel, gibbs_energy
from .map_bcd import BcdOptions, MapResult, bcd_map, update_alpha, update_beta, update_u
from .gibbs import ChainSamples, GibbsOptions, run_gibbs
from .diagnostics import ess, mpsrf, quantile_band, rel_l2_error, summarize_chains
from .dg import DgSolution, dg_l2_error, dg_solve

__all__ = [
    "bspline_eval", "bspline_knots", "bspline_moment",
    "ScaledKernel", "SiacKernelSpec", "build_kernel", "filter_function", "kernel_eval",
    "Layout", "UniformPeriodicMesh", "build_mesh",
    "FilterMatrix", "build_filter_matrix", "filter_apply",
    "LinearOperator", "IdentityOperator", "DenseOperator", "KroneckerOperator",
    "identity_operator", "gaussian_blur_1d", "kron_separable", "vec", "unvec",
    "SyntheticDataset", "make_dataset",
    "HyperPriors", "BayesSiacModel", "gibbs_energy", "check_common_kernel",
    "BcdOptions", "MapResult", "update_alpha", "update_beta", "update_u", "bcd_map",
    "GibbsOptions", "ChainSamples", "run_gibbs",
    "ess", "mpsrf", "quantile_band", "rel_l2_error", "summarize_chains",
    "DgSolution", "dg_solve", "dg_l2_error",
]
