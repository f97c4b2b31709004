"""Hausdorff dimension of intersections of translated Cantor sets via Lyapunov exponents."""

from .degenerate import lyapunov_degenerate
from .digitsets import (
    DigitPair,
    MissingOneClass,
    TransferMatrices,
    build_matrices,
    classify_missing_one,
    is_degenerate,
    toothless_matrices,
)
from .errors import CantorDimError, MethodInapplicable, NumericalGuard, ProblemParseError
from .measures import ProductMeasure, lebesgue
from .moebius import IfsSystem, MoebiusMap, conjugate, induced_map
from .neumann import lyapunov_neumann, nac_report, truncation_plan
from .oracle import grid_stationary, mc_lyapunov
from .phisearch import search_phi
from .pipeline import Problem, load_problem, parse_problem, run_dim
from .recurring import lyapunov_recurring
from .result import LyapunovResult, Method, dim_from_lambda

__version__ = "0.1.0"

__all__ = [
    "CantorDimError",
    "DigitPair",
    "IfsSystem",
    "LyapunovResult",
    "Method",
    "MethodInapplicable",
    "MissingOneClass",
    "MoebiusMap",
    "NumericalGuard",
    "Problem",
    "ProblemParseError",
    "ProductMeasure",
    "TransferMatrices",
    "build_matrices",
    "classify_missing_one",
    "conjugate",
    "dim_from_lambda",
    "grid_stationary",
    "induced_map",
    "is_degenerate",
    "lebesgue",
    "load_problem",
    "lyapunov_degenerate",
    "lyapunov_neumann",
    "lyapunov_recurring",
    "mc_lyapunov",
    "nac_report",
    "parse_problem",
    "run_dim",
    "search_phi",
    "toothless_matrices",
    "truncation_plan",
]
