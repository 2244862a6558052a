"""Eigenvalues of non-self-adjoint Sturm-Liouville problems by regularized sampling."""

from .expr import Expr, ExprError, ExprEvalError, ExprSyntaxError, parse
from .ivp import BaseSolution, IvpConfig, IvpError, rkf45_integrate, solve_base_pair, solve_base_pairs
from .problems import Problem, ProblemError, builtin, builtin_names, exact_char_ex34
from .bessel import bessel_j, gamma
from .sampling import (
    SampleTable,
    SamplingConfig,
    SamplingError,
    RegularizerSingularityError,
    build_sample_table,
    char_function,
    char_function_direct,
    eval_h,
    reconstruct_endpoint,
    sinc_reg,
)
from .rootfind import (
    Eigenvalue,
    RootFindError,
    SearchRect,
    SpectrumResult,
    localize_zeros,
    refine_zero,
    spectrum,
    winding_number,
)
from .bounds import BoundInputs, bound_inputs, char_bound, eigenvalue_error_bound, truncation_bound

__version__ = "0.1.0"

__all__ = [
    "Expr", "ExprError", "ExprEvalError", "ExprSyntaxError", "parse",
    "BaseSolution", "IvpConfig", "IvpError", "rkf45_integrate", "solve_base_pair", "solve_base_pairs",
    "Problem", "ProblemError", "builtin", "builtin_names", "exact_char_ex34", "bessel_j", "gamma",
    "SampleTable", "SamplingConfig", "SamplingError", "RegularizerSingularityError",
    "build_sample_table", "char_function", "char_function_direct", "eval_h", "reconstruct_endpoint", "sinc_reg",
    "Eigenvalue", "RootFindError", "SearchRect", "SpectrumResult",
    "localize_zeros", "refine_zero", "spectrum", "winding_number",
    "BoundInputs", "bound_inputs", "char_bound", "eigenvalue_error_bound", "truncation_bound",
]
