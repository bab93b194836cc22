"""Explicit geometric convergence rates for Markov chains.

Certificates in (drift, minorization, petiteness) go in; explicit constants
(D, gamma) with ||P^n(x, .) - pi||_V <= D V(x) gamma^n come out, alongside
exhaustive finite-chain verification of every intermediate inequality.
"""

from ergobounds.chain import (
    FiniteChain,
    WeightFunction,
    hitting_law,
    hitting_mgf_all,
    mean_hitting_time_all,
    mgf_weighted_sum_all,
    stationary,
    vnorm_distance,
    vnorm_profile,
)
from ergobounds.drift import (
    DriftCertificate,
    PetitenessCertificate,
    TransferBound,
    access_probability,
    drift_mgf_bound,
    drift_tail_bound,
    fit_drift,
    transfer_bound,
    transfer_rate_limit,
    verify_drift,
    verify_petiteness,
    verify_weighted_sum_bound,
)
from ergobounds.errors import (
    BoundViolationError,
    ErgoBoundsError,
    HypothesisFailError,
    ValidationError,
)
from ergobounds.harris import (
    HarrisBound,
    HarrisInputs,
    fit_harris_inputs,
    harris_constants,
    verify_harris_bound,
    verify_hypotheses,
)
from ergobounds.kendall import (
    KendallBound,
    bivariate_chain,
    bivariate_drift,
    bivariate_petiteness,
    coupling_tail,
    kendall_constants,
    kendall_verify,
)
from ergobounds.logspace import LogReal
from ergobounds.montecarlo import (
    SimulationConfig,
    simulate_coupling_time,
    simulate_hitting,
)
from ergobounds.renewal import (
    IncrementDistribution,
    delayed_renewal,
    long_run_rate,
    renewal_sequence,
    stationary_delay,
)
from ergobounds.splitting import (
    MinorizationCertificate,
    fit_minorization,
    invariant_identities,
    regenerative_check,
    split_chain,
    verify_minorization,
)

__version__ = "0.1.0"

__all__ = [
    "BoundViolationError",
    "DriftCertificate",
    "ErgoBoundsError",
    "FiniteChain",
    "HarrisBound",
    "HarrisInputs",
    "HypothesisFailError",
    "IncrementDistribution",
    "KendallBound",
    "LogReal",
    "MinorizationCertificate",
    "PetitenessCertificate",
    "SimulationConfig",
    "TransferBound",
    "ValidationError",
    "WeightFunction",
    "access_probability",
    "bivariate_chain",
    "bivariate_drift",
    "bivariate_petiteness",
    "coupling_tail",
    "delayed_renewal",
    "drift_mgf_bound",
    "drift_tail_bound",
    "fit_drift",
    "fit_harris_inputs",
    "fit_minorization",
    "harris_constants",
    "hitting_law",
    "hitting_mgf_all",
    "invariant_identities",
    "kendall_constants",
    "kendall_verify",
    "long_run_rate",
    "mean_hitting_time_all",
    "mgf_weighted_sum_all",
    "regenerative_check",
    "renewal_sequence",
    "simulate_coupling_time",
    "simulate_hitting",
    "split_chain",
    "stationary",
    "stationary_delay",
    "transfer_bound",
    "transfer_rate_limit",
    "verify_drift",
    "verify_harris_bound",
    "verify_hypotheses",
    "verify_minorization",
    "verify_petiteness",
    "verify_weighted_sum_bound",
    "vnorm_distance",
    "vnorm_profile",
]
