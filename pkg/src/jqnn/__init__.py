"""Constructive quantum neural network approximation of periodic functions
via Jackson-type trigonometric operators."""

from jqnn.pipeline import (
    ErrorCurve,
    MultiQnnModel,
    UniQnnModel,
    approximate_multivariate,
    approximate_univariate,
    run_experiment,
)
from jqnn.qnn_compile import CompileFailed, compile_monomial, compile_trig_poly
from jqnn.qnn_params import QnnParams
from jqnn.qsim import BlockSpec, TooLarge
from jqnn.trig_core import PeriodicFn, TrigPoly1D, TrigPolyND, jackson_approx_1d, jackson_approx_nd, jackson_weights

__version__ = "0.1.0"
