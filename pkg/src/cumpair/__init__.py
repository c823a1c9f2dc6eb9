"""Higher-order cumulant tests for a latent-confounded pair of variables.

Given paired samples of X and Y that share one latent cause, the package
decides whether a directed edge X -> Y or Y -> X is also present, using
joint cumulants up to order five and a bootstrap sign test.
"""

from cumpair.cumulants import (
    CumulantProfile,
    MomentTable,
    PairedSample,
    center,
    cumulant_profile,
    joint_cumulant,
    moment_table,
)
from cumpair.discovery import (
    ConfounderCoefficients,
    DirectionResiduals,
    RatioPair,
    direction_residuals,
    edge_statistic,
    estimate_confounder_coefficients,
    ratio_quadratic_coefficients,
    shared_third_cumulant_terms,
    solve_ratio_quadratic,
)
from cumpair.errors import CumpairError
from cumpair.inference import (
    BootstrapConfig,
    PairDecision,
    SignTestResult,
    Verdict,
    bootstrap_statistics,
    collect_evidence,
    decide_pair,
    sign_test,
)
from cumpair.model import (
    MixingMatrix,
    NoiseSpec,
    NonlinearSpec,
    PairModel,
    Structure,
    exact_joint_cumulant,
    exact_profile,
    noise_cumulant,
    random_model,
    sample,
    sample_nonlinear,
    to_mixing,
)

__version__ = "0.1.0"
