"""Fractional stochastic differential equations: Mittag-Leffler functions,
fractional calculus on grids, Volterra path simulation, fractional OU
variance, chaos expansions and mode-wise well-posedness of fractional SPDEs."""

from .errors import (
    ClassicalSolutionError,
    ConvergenceError,
    DomainError,
    FactorizationError,
    FracSDEError,
    NumericalError,
)
from .special_functions import EvalConfig, MLIndex, gamma_eval, ml_eval, mittag_leffler, ml_y_eval, phi_eval
from .frac_calculus import (
    IntegralKind,
    LaplaceGrid,
    SampledPath,
    caputo_derivative,
    frac_integral,
    gronwall_bound,
    laplace_numeric,
    rl_derivative,
    solve_linear_fode,
)
from .volterra_sim import (
    FouKernel,
    FouParams,
    GridSpec,
    Method,
    PathEnsemble,
    PowerKernel,
    empirical_moments,
    simulate_bm,
    simulate_fgbm,
    simulate_fou,
    simulate_volterra,
)
from .fou_analysis import Regime, RegimeTag, fou_limit_variance, fou_mean, fou_variance, regime_classify
from .chaos_expansion import (
    ChaosTable,
    GbmParams,
    MultiIndex,
    WeightSequence,
    gbm_propagator,
    gbm_second_moment,
    weighted_norm,
)
from .spde_analysis import SpdeParams, Verdict, VerdictTag, classify, growth_probe, second_moment_volterra

__version__ = "0.1.0"
