"""Certified total-variation convergence bounds for Gibbs samplers.

Models live in :mod:`gibbs_certify.models`, exact TV oracles in
:mod:`gibbs_certify.oracle`, bounds in :mod:`gibbs_certify.bounds` and the
parameter search in :mod:`gibbs_certify.tuner`.
"""

from .bounds import (
    BoundCurve,
    DriftCertificate,
    MinorizationCertificate,
    dks_beta_binomial_bounds,
    numeric_eigendecomposition,
    prop3_epsilon,
    prop4_bound_curve,
    prop4_v,
    rosenthal_bound_curve,
    rosenthal_t,
    spectral_bound,
    spectral_bound_curve,
    uniform_bound_curve,
    uniform_u,
    verify_drift,
)
from .ergodicity import RectanglePair, check_condition_3, check_ergodic_finite
from .errors import (
    CertificateError,
    DomainError,
    GibbsCertifyError,
    InfeasibleError,
    ModelError,
    NumericError,
    TruncationError,
    UnsupportedError,
)
from .kernel import TransitionMatrix, drift_expectation, gibbs_step, x_chain_matrix
from .models import (
    BetaBinomial,
    FiniteModel,
    Gaussian,
    PoissonGamma,
    ThreeComponentModel,
    TwoComponentModel,
    build_model,
)
from .oracle import (
    bivariate_tv_sandwich,
    exact_tv_finite,
    exact_tv_gaussian,
    exact_tv_truncated,
    simulate_chain,
    three_component_sandwich,
)
from .spaces import Subset
from .tuner import mixing_time_from_curve, optimize_rosenthal, optimize_uniform_B

__version__ = "0.1.0"
