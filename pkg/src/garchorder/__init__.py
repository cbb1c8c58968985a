"""Simulation and exact verification of stochastic orders in GARCH-like processes."""

from .core import (
    AsymmetricInnovationError,
    DivergenceError,
    GarchParams,
    GarchSimulator,
    InitialStateSpec,
    InnovationSpec,
    PathBatch,
    RecursionMap,
    avgarch_m1,
    closed_form_variance,
    compose_g,
    garch11_m1,
    garch11_m2,
    logreturn_sums,
    quadratic_m2,
    recursion_from_label,
    simulate_paths,
)
from .distributions import (
    DiscreteDist,
    EmpiricalCDFTransformer,
    EmpiricalDist,
    StopLossTransformer,
    cdf,
    integrated_survival_weighted,
    kurtosis_beta2,
    stop_loss,
)
from .oracle import (
    THEOREMS,
    DilationPair,
    ExactPathTree,
    SignVectorSet,
    convexity_check,
    exact_expectation,
    make_dilation,
    symmetrize_h,
    symmetrize_h_multivariate,
    verify_theorem,
)
from .orders import (
    Direction,
    OrderVerdict,
    TestFunctionFamily,
    check_cx,
    check_icx,
    check_kurtosis,
    check_peakedness,
    check_st,
    check_supermodular_cx,
    density_crossings,
    sign_changes,
)

__version__ = "0.1.0"
