"""Algebraic invariant synthesis with generalized-homogeneous templates.

The usual entry point is :func:`invgh.pipeline.run_infer`; the command line
tool ``invgh`` wraps it together with g-degree inference, empirical checks
and a benchmark harness.
"""

from .gdeg import GDeg, infer_gamma, merge_literals
from .interp import check_postcondition, execute
from .lang import parse_poly, parse_program, pretty_print
from .pipeline import InferConfig, RunReport, run_infer
from .poly import Monomial, Polynomial, Template
from .solver import normalize_invariant

__all__ = [
    "GDeg",
    "InferConfig",
    "Monomial",
    "Polynomial",
    "RunReport",
    "Template",
    "check_postcondition",
    "execute",
    "infer_gamma",
    "merge_literals",
    "normalize_invariant",
    "parse_poly",
    "parse_program",
    "pretty_print",
    "run_infer",
]
