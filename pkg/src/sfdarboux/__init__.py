"""Liouvillian first integrals of rational second-order ODEs ``z' = phi(x, y, z)``, ``z = y'``.

The pipeline finds a rational S-function, builds the associated plane fields,
collects Darboux polynomials, balances cofactors into an integrating factor
and integrates it in closed form.  Every result is certified by exact
substitution.
"""

from __future__ import annotations

from .algebra import ONE, Poly, RatFn, X, Y, Z, gcd_poly, squarefree_decomposition
from .darboux import (
    CofactorBalance,
    DarbouxPair,
    ExpPart,
    NoSolution,
    apply_field,
    balance_cofactors,
    cofactor_of,
    complete_balance,
    find_common_dps,
    find_dps,
    recover_dp,
    solve_exp_part,
    triple_fields,
)
from .frontend import DegenerateOde, Ode2, ParseError, format_expression, parse_expression, parse_ode2
from .integrate import (
    FirstIntegralForm,
    IntegratingFactor,
    assemble_R,
    gradients_parallel,
    integrate_closed_form,
    parse_first_integral,
    verify_first_integral,
)
from .oracle import OracleInstance, generate_random_integrable
from .pipeline import ConfigError, PipelineConfig, PipelineReport, run_pipeline
from .sfunction import STriple, VField, associated_field, build_triple, find_sfunction, spde_residual
from .solver import LinearSystem, solve_linear, solve_quadratic_bounded

__version__ = "0.1.0"

__all__ = [
    "ONE", "X", "Y", "Z", "Poly", "RatFn", "gcd_poly", "squarefree_decomposition",
    "CofactorBalance", "DarbouxPair", "ExpPart", "NoSolution", "apply_field", "balance_cofactors",
    "cofactor_of", "complete_balance", "find_common_dps", "find_dps", "recover_dp", "solve_exp_part",
    "triple_fields",
    "DegenerateOde", "Ode2", "ParseError", "format_expression", "parse_expression", "parse_ode2",
    "FirstIntegralForm", "IntegratingFactor", "assemble_R", "gradients_parallel",
    "integrate_closed_form", "parse_first_integral", "verify_first_integral",
    "OracleInstance", "generate_random_integrable",
    "ConfigError", "PipelineConfig", "PipelineReport", "run_pipeline",
    "STriple", "VField", "associated_field", "build_triple", "find_sfunction", "spde_residual",
    "LinearSystem", "solve_linear", "solve_quadratic_bounded",
]
