"""Drift certificates and rate-weighted return-time bounds.

A drift certificate (lam, b) for a weight V and a small set C asserts

    (P V)(x) <= lam V(x) + b 1_C(x)      for every state x,

with 0 < lam < 1.  It buys geometric control of weighted sums up to the
return time tau_C at any rate r with lam r < 1:

    E_x[ sum_{k < tau_C} V(X_k) r^k ] <= (1 + r b) / (1 - lam r) * V(x).

A petiteness certificate (N0, c) for a source set C and a target set B
asserts P_x{tau_B <= N0} >= c for every x in C.  transfer_bound splices the
two: control of returns to C plus guaranteed access from C to B yields
geometric control of weighted sums up to tau_B, at a strictly smaller rate.
All assembled constants are carried in log space; see logspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .chain import FiniteChain, WeightFunction, hitting_law, mgf_weighted_sum_all
from .errors import (
    NoContractionError,
    R2TooLargeError,
    RateRangeError,
    ValidationError,
)
from .logspace import (
    ONE,
    ZERO,
    LogReal,
    expm1_log,
    log_of_rate,
    neg_log1p_neg,
    one_minus_exp_neg,
)

RateLike = Union[float, LogReal]

# Guard band on certified rate ceilings: at least 1e-9 relative, widened to
# 64 ulps of the excess's own log so the band survives float64 rounding even
# when that log is around 1e15.  Wider bands only make the ceiling safer.
_GUARD_LOG = 1e-9
_GUARD_ULPS = 64.0 * 2.220446049250313e-16


def _shave_ceiling(raw_log: float) -> LogReal:
    shave = max(_GUARD_LOG, abs(raw_log) * _GUARD_ULPS)
    return LogReal(raw_log - shave)


def _as_excess(eps: RateLike) -> LogReal:
    """Coerce a rate excess r - 1 >= 0 to LogReal."""
    if isinstance(eps, LogReal):
        return eps
    return LogReal.from_float(float(eps))


@dataclass(frozen=True)
class DriftCertificate:
    """(lam, b) drift of a weight V into a small set C (state indices)."""

    lam: float
    b: float
    weights: WeightFunction
    small_set: tuple

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValidationError(f"contraction factor must be in (0, 1), got {self.lam}")
        if self.b < 0.0:
            raise ValidationError(f"drift offset must be >= 0, got {self.b}")
        if len(self.small_set) == 0:
            raise ValidationError("small set must be nonempty")
        object.__setattr__(self, "small_set", tuple(int(i) for i in self.small_set))

    def set_weight_sup(self) -> float:
        """sup of V over the small set."""
        return self.weights.max_over(np.asarray(self.small_set, dtype=int))


@dataclass(frozen=True)
class PetitenessCertificate:
    """Guaranteed access: from each source-set state, P{tau_target <= steps} >= mass.

    The mass may be a LogReal; forced-path masses like beta^M underflow
    float64 long before they stop being useful.  source and target hold the
    state labels when the certificate is tied to a concrete chain; pure
    arithmetic paths leave them None.
    """

    steps: int
    mass: Union[float, LogReal]
    source: tuple = None
    target: tuple = None

    def __post_init__(self):
        if self.steps < 1 or self.steps != int(self.steps):
            raise ValidationError(f"access step count must be a positive integer, got {self.steps}")
        m = self.mass
        if not isinstance(m, LogReal):
            if not 0.0 < m <= 1.0:
                raise ValidationError(f"access mass must be in (0, 1], got {m}")
            m = LogReal.from_float(float(m))
        if m.is_zero or m > ONE:
            raise ValidationError("access mass must be in (0, 1]")
        object.__setattr__(self, "mass", m)
        for field in ("source", "target"):
            val = getattr(self, field)
            if val is not None:
                object.__setattr__(self, field, tuple(val))

    @property
    def mass_float(self) -> float:
        return self.mass.to_float()


@dataclass(frozen=True)
class GeometricTailBound:
    """E[ sum_{k < tau} V(X_k) r^k ] <= coefficient * V(start), r = 1 + rate_excess.

    scope records what the coefficient multiplies: the default per-state
    form (times V at the start), or the label of a set over which the
    coefficient alone is a supremum.
    """

    rate_excess: LogReal
    coefficient: LogReal
    scope: str = "per-state multiple of V"

    @property
    def rate(self) -> float:
        """Linear rate; rounds to 1.0 when the excess is below float64 ulp."""
        return 1.0 + float(self.rate_excess)

    @property
    def log_rate(self) -> LogReal:
        return log_of_rate(self.rate_excess)


@dataclass(frozen=True)
class TransferBound:
    """Output of transfer_bound: the certifiable rate ceiling and one point on it.

    rho_excess is the largest output rate excess the argument certifies,
    already shaved by a relative 1e-9 so the coefficient stays finite right
    at the ceiling.  rate_excess <= rho_excess is the rate the coefficient
    was evaluated at.  The bound itself reads like GeometricTailBound:
    E_x[ sum_{k < tau} V r^k ] <= coefficient * V(x) for every state x.
    """

    rho_excess: LogReal
    rate_excess: LogReal
    coefficient: LogReal

    @property
    def rate(self) -> float:
        return 1.0 + float(self.rate_excess)

    @property
    def rho(self) -> float:
        return 1.0 + float(self.rho_excess)


@dataclass(frozen=True)
class DriftReport:
    ok: bool
    worst_slack: float
    measured_lam: float
    measured_b: float


@dataclass(frozen=True)
class AccessReport:
    ok: bool
    worst_mass: float
    worst_source: int


@dataclass(frozen=True)
class BoundReport:
    """Exhaustive comparison of an exact quantity against a claimed bound.

    ``worst_log_ratio`` is max over sources of ln(exact) - ln(bound); any
    value <= 0 (up to 1e-9) certifies the bound.
    """

    ok: bool
    worst_log_ratio: float
    worst_source: int


def verify_drift(chain: FiniteChain, cert: DriftCertificate) -> DriftReport:
    """Check the drift inequality pointwise; measure the tightest constants."""
    v = cert.weights.values
    if v.shape[0] != chain.n_states:
        raise ValidationError("weight vector length does not match the chain")
    pv = chain.matrix @ v
    allowed = cert.lam * v
    in_set = np.zeros(chain.n_states, dtype=bool)
    in_set[list(cert.small_set)] = True
    allowed = allowed + cert.b * in_set
    slack = allowed - pv
    off = ~in_set
    measured_lam = float((pv[off] / v[off]).max()) if off.any() else 0.0
    measured_b = float((pv[in_set] - cert.lam * v[in_set]).max())
    return DriftReport(
        ok=bool(slack.min() >= -1e-12),
        worst_slack=float(slack.min()),
        measured_lam=measured_lam,
        measured_b=max(0.0, measured_b),
    )


def fit_drift(chain: FiniteChain, weights: WeightFunction, small_set) -> DriftCertificate:
    """Tightest (lam, b) for the given weight and small set.

    Raises NO_CONTRACTION when PV / V reaches 1 somewhere off the set.
    """
    idx = chain.indices(small_set)
    v = weights.values
    if v.shape[0] != chain.n_states:
        raise ValidationError("weight vector length does not match the chain")
    pv = chain.matrix @ v
    off = np.ones(chain.n_states, dtype=bool)
    off[idx] = False
    if not off.any():
        raise ValidationError("small set must not cover the whole space")
    lam = float((pv[off] / v[off]).max())
    if lam >= 1.0 - 1e-12:
        raise NoContractionError(
            f"weight ratio reaches {lam} off the small set", measured_lam=lam
        )
    b = max(0.0, float((pv[idx] - lam * v[idx]).max()))
    return DriftCertificate(lam=lam, b=b, weights=weights, small_set=tuple(int(i) for i in idx))


def access_probability(chain: FiniteChain, source_set, target_set, steps: int) -> float:
    """min over x in the source set of P_x{tau_target <= steps}."""
    idx = chain.indices(source_set)
    worst = 1.0
    for i in idx:
        law = hitting_law(chain, chain.states[i], target_set, horizon=steps)
        worst = min(worst, float(law.probs.sum()))
    return worst


def verify_petiteness(
    chain: FiniteChain, cert: PetitenessCertificate, source_set=None, target_set=None
) -> AccessReport:
    """Exact infimum of the access probability against the certified mass.

    Source and target sets default to the ones stored on the certificate.
    """
    source_set = cert.source if source_set is None else source_set
    target_set = cert.target if target_set is None else target_set
    if source_set is None or target_set is None:
        raise ValidationError("certificate carries no sets; pass source_set and target_set")
    idx = chain.indices(source_set)
    worst, worst_src = 1.0, int(idx[0])
    for i in idx:
        mass = float(hitting_law(chain, chain.states[i], target_set, horizon=cert.steps).probs.sum())
        if mass < worst:
            worst, worst_src = mass, int(i)
    return AccessReport(
        ok=bool(worst >= cert.mass_float - 1e-12), worst_mass=worst, worst_source=worst_src
    )


def drift_mgf_bound(
    lam: float, b: float, rate_excess: RateLike, weight_at_start: RateLike = 1.0
) -> LogReal:
    """(1 + r b) / (1 - lam r) * V(start) at r = 1 + rate_excess.

    Bounds E_x[ sum_{k < tau_C} V(X_k) r^k ] given the drift (lam, b);
    weight_at_start is V(x) (or a sup of it).  Valid for lam r < 1; raises
    RATE_RANGE past that.  The subtraction 1 - lam r is formed as
    (1 - lam) - lam (r - 1) so nothing cancels.
    """
    if not 0.0 < lam < 1.0:
        raise ValidationError(f"contraction factor must be in (0, 1), got {lam}")
    if b < 0.0:
        raise ValidationError(f"drift offset must be >= 0, got {b}")
    eps = _as_excess(rate_excess)
    try:
        margin = LogReal.from_float(1.0 - lam) - lam * eps
    except ValueError:
        raise RateRangeError(
            f"rate exceeds 1/lam = {1.0 / lam}", lam=lam
        ) from None
    if margin.is_zero:
        raise RateRangeError(f"rate equals 1/lam = {1.0 / lam}", lam=lam)
    numerator = ONE + b + b * eps
    vx = weight_at_start if isinstance(weight_at_start, LogReal) else LogReal.from_float(float(weight_at_start))
    if vx < ONE:
        raise ValidationError("start weight must be >= 1 (weights are >= 1)")
    return numerator / margin * vx


def verify_weighted_sum_bound(
    chain: FiniteChain,
    weights: WeightFunction,
    target_set,
    bound: GeometricTailBound,
    log_tol: float = 1e-9,
) -> BoundReport:
    """Exact E_x[sum_{k<tau} V r^k] against coefficient * V(x), all sources.

    The comparison runs on logarithms so coefficients past float64 overflow
    still verify.  When the rate excess underflows to 0 linearly, the exact
    side is evaluated at r = 1, which only weakens the exact side, so a pass
    is still a true pass.
    """
    r = 1.0 + float(bound.rate_excess)
    exact = mgf_weighted_sum_all(chain, weights, target_set, r)
    log_bound = bound.coefficient.log + np.log(weights.values)
    log_ratio = np.log(exact) - log_bound
    worst = int(np.argmax(log_ratio))
    return BoundReport(
        ok=bool(log_ratio[worst] <= log_tol),
        worst_log_ratio=float(log_ratio[worst]),
        worst_source=worst,
    )


def _geometric_block_sum(step_log: LogReal, count: int) -> LogReal:
    """sum_{i=1}^{count} exp(i * step_log) for step_log > 0, in closed form."""
    xi = expm1_log(step_log)
    if xi.is_zero:
        return LogReal.from_float(float(count))
    return (ONE + xi) * expm1_log(step_log * count) / xi


def transfer_rate_limit(
    m0: RateLike, rate_excess: RateLike, petite: PetitenessCertificate
) -> LogReal:
    """Largest output rate excess transfer_bound certifies, guard band applied.

    With kappa = ln(1/(1 - mass)) and G = 1 + (r - 1) m0, the argument
    closes for every rate below

        ln(rho) = ln(r) * kappa / (kappa + steps * ln(G)),

    and mass = 1 gives rho = r outright, attained with a finite
    coefficient.  For mass < 1 the coefficient blows up at the supremum, so
    the reported excess is shaved by at least a relative 1e-9 (more when
    the excess's log is so large that 1e-9 would vanish in its rounding);
    the shaved value is the rho every caller sees and may be fed back in as
    the output rate.
    """
    eps1 = _as_excess(rate_excess)
    m0 = _coerce_m0(m0)
    if eps1.is_zero:
        raise RateRangeError("input rate must exceed 1")
    if petite.mass.log == 0.0:
        return eps1
    kappa = neg_log1p_neg(petite.mass)
    log_r1 = log_of_rate(eps1)
    log_growth = log_of_rate(eps1 * m0)
    log_rho = log_r1 * kappa / (kappa + log_growth * petite.steps)
    return _shave_ceiling(expm1_log(log_rho).log)


def _coerce_m0(m0: RateLike) -> LogReal:
    m = m0 if isinstance(m0, LogReal) else LogReal.from_float(float(m0))
    if m < ONE:
        raise ValidationError("return-sum coefficient must be >= 1 (weights are >= 1)")
    return m


def transfer_bound(
    m0: RateLike,
    rate_excess_in: RateLike,
    petite: PetitenessCertificate,
    rate_excess_out: RateLike = None,
) -> TransferBound:
    """Geometric control up to tau_B from control up to tau_C plus access.

    Hypotheses, at rate r1 = 1 + rate_excess_in, target set C:

      * E_x[sum_{k < tau_C} V r1^k] <= m0 V(x) for every start x, and
      * the same expectation is <= m0 uniformly for starts inside C;

    plus the access certificate from C to B.  Output, at any rate
    r2 = 1 + rate_excess_out up to the certified ceiling rho (the default
    when no output rate is given):

        E_x[sum_{k < tau_B} V r2^k] <= D V(x)   for every x.

    Rates past rho raise R2_TOO_LARGE.  The proof splits the pre-tau_B
    trajectory at successive C-visits.  Each visit block costs at most m0
    times the rate weight at its start; access attempts spaced ``steps``
    visits apart fail independently with probability at most 1 - mass; the
    r2 < r1 gap absorbs the visit count through a Hoelder split.  Summing
    the resulting geometric series gives

        D = m0 (1 + h / (1 - R)),
        h = sum_{l=1}^{steps} G^{l/a},  R = (1-mass)^{(a-1)/a} G^{steps/a},
        G = 1 + (r1 - 1) m0,            a = ln r1 / ln r2 > 1,

    computed entirely in log space.  mass = 1 removes the failure branch:
    rho = r1 and D = m0 (1 + sum_{l=1}^{steps} G(r2)^l).
    """
    eps1 = _as_excess(rate_excess_in)
    m0 = _coerce_m0(m0)
    if eps1.is_zero:
        raise RateRangeError("input rate must exceed 1")
    rho = transfer_rate_limit(m0, eps1, petite)
    eps2 = rho if rate_excess_out is None else _as_excess(rate_excess_out)
    if eps2.is_zero:
        raise RateRangeError("output rate must exceed 1")
    if eps2 > rho:
        raise R2TooLargeError(
            "output rate exceeds the certifiable ceiling",
            rho_excess_log=rho.log,
            requested_excess_log=eps2.log,
        )

    if petite.mass.log == 0.0:
        block = _geometric_block_sum(log_of_rate(eps2 * m0), petite.steps)
        return TransferBound(rho_excess=rho, rate_excess=eps2, coefficient=m0 * (ONE + block))

    kappa = neg_log1p_neg(petite.mass)
    log_r1 = log_of_rate(eps1)
    log_r2 = log_of_rate(eps2)
    inv_alpha = log_r2 / log_r1
    log_growth = log_of_rate(eps1 * m0)
    per_visit = log_growth * inv_alpha
    decay = kappa * (ONE - inv_alpha)
    escape = per_visit * petite.steps
    try:
        log_margin = decay - escape
    except ValueError:
        log_margin = ZERO
    if log_margin.is_zero:
        raise NoContractionError(
            "no margin left below the certified ceiling; the ceiling itself is inconsistent",
            rho_excess_log=rho.log,
        )
    h = _geometric_block_sum(per_visit, petite.steps)
    coeff = m0 * (ONE + h / one_minus_exp_neg(log_margin))
    return TransferBound(rho_excess=rho, rate_excess=eps2, coefficient=coeff)


def midpoint_rate_excess(limit_excess: LogReal) -> LogReal:
    """Half the limit excess: the canonical safe output rate."""
    if limit_excess.is_zero:
        raise RateRangeError("cannot take the midpoint of a degenerate rate interval")
    return limit_excess * 0.5


def drift_tail_bound(cert: DriftCertificate, rate_excess: RateLike) -> GeometricTailBound:
    """drift_mgf_bound scaled by the small-set weight sup.

    The resulting coefficient works both per-start (times V(x)) and
    uniformly over small-set starts, which is exactly the hypothesis pair
    transfer_bound consumes.
    """
    eps = _as_excess(rate_excess)
    coeff = drift_mgf_bound(cert.lam, cert.b, eps, cert.set_weight_sup())
    return GeometricTailBound(
        rate_excess=eps,
        coefficient=coeff,
        scope="per-state multiple of V and sup over the small set",
    )
