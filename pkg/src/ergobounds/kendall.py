"""Geometric convergence of renewal sequences via a coupled pair of copies.

A fresh copy (renewal at time 0) and a stationary-delay copy of the same
renewal process run side by side.  Each copy is tracked by its countdown to
the next renewal plus one, so component value 1 means "renewing now".  The
pair moves as a Markov chain on {1..L}^2:

  * both components above 1: each ticks down by one;
  * exactly one component at 1: that copy draws a fresh increment, the
    other ticks down;
  * both at 1: the copies draw fresh increments independently.

The first visit to (1, 1) is the coupling time T, and
|u(n) - 1/mean| <= P{T > n}.  The weight V(a, b) = (r^(a-1) + r^(b-1)) / 2
drifts into the boundary rays {a = 1 or b = 1, coordinate <= level}, the
rays reach (1, 1) by forcing increment-1 draws, and the drift/access pair
feeds the rate-transfer argument.  kendall_constants runs that pipeline as
pure log-space arithmetic from five numbers, so it survives the regimes
where the certified rate excess is far below float64 resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    FiniteChain,
    WeightFunction,
    hitting_law,
    hitting_mgf_all,
    taboo_spectral_radius,
)
from .drift import (
    DriftCertificate,
    PetitenessCertificate,
    RateLike,
    _as_excess,
    access_probability,
    transfer_bound,
    transfer_rate_limit,
    verify_drift,
)
from .errors import (
    DivergentExpectationError,
    DriftViolationError,
    EtaRangeError,
    HypothesisFailError,
    R2TooLargeError,
    RateRangeError,
    ValidationError,
)
from .logspace import ONE, LogReal, exp_log, log_of_rate
from .renewal import (
    IncrementDistribution,
    long_run_rate,
    renewal_sequence,
    stationary_delay,
)


def bivariate_chain(inc: IncrementDistribution) -> FiniteChain:
    """The coupled-pair chain on {1..L}^2, states labelled (a, b)."""
    span = inc.span
    states = [(a, b) for a in range(1, span + 1) for b in range(1, span + 1)]
    idx = {s: i for i, s in enumerate(states)}
    m = np.zeros((len(states), len(states)))
    pmf = inc.pmf
    for a, b in states:
        i = idx[(a, b)]
        if a > 1 and b > 1:
            m[i, idx[(a - 1, b - 1)]] = 1.0
        elif a == 1 and b > 1:
            for k in range(1, span + 1):
                m[i, idx[(k, b - 1)]] += pmf[k]
        elif a > 1 and b == 1:
            for k in range(1, span + 1):
                m[i, idx[(a - 1, k)]] += pmf[k]
        else:
            for j in range(1, span + 1):
                for k in range(1, span + 1):
                    m[i, idx[(j, k)]] += pmf[j] * pmf[k]
    return FiniteChain(m, states=states)


def lyapunov_value(a: int, b: int, rate: float) -> float:
    return 0.5 * (rate ** (a - 1) + rate ** (b - 1))


def lyapunov_weights(chain: FiniteChain, rate: float) -> WeightFunction:
    if rate < 1.0:
        raise RateRangeError(f"rate must be >= 1, got {rate}")
    return WeightFunction([lyapunov_value(a, b, rate) for a, b in chain.states])


def boundary_rays(span: int, level: int):
    """Ray states with the moving coordinate at most level, clipped to the span."""
    top = min(span, level)
    rays = [(1, b) for b in range(1, top + 1)]
    rays += [(a, 1) for a in range(2, top + 1)]
    return tuple(rays)


@dataclass(frozen=True)
class BivariateDrift:
    """Pointwise-verified drift of the pair weight into the boundary rays."""

    level: int
    small_set: tuple
    offset: float


def _drift_level(num: float, den: float, rate: float, clamp: int) -> int:
    if num <= 0.0:
        return clamp
    return max(clamp, math.ceil(math.log(num / den) / math.log(rate) + 1.0))


def bivariate_drift(inc: IncrementDistribution, rate: float, eta: float) -> BivariateDrift:
    """Drift constants for the pair weight at the given rate and factor eta.

    Off the rays the weight contracts by 1/rate <= eta outright; on a ray
    the fresh draw costs mgf(rate)/rate, which eta absorbs once the moving
    coordinate exceeds the returned level.  The resulting certificate is
    checked exactly on every state before it is returned.
    """
    if rate <= 1.0:
        raise RateRangeError(f"rate must exceed 1, got {rate}")
    if not 1.0 / rate < eta < 1.0:
        raise EtaRangeError(f"eta must lie in (1/rate, 1), got {eta}")
    s = inc.mgf(rate)
    clamp = 1 if inc.pmf[1] == 1.0 else 2
    level = _drift_level(s - eta * rate, eta * rate - 1.0, rate, clamp)
    offset = max(2.0 * s, s + rate ** (level - 1)) / (2.0 * rate)
    chain = bivariate_chain(inc)
    small = boundary_rays(inc.span, level)
    cert = DriftCertificate(
        lam=eta,
        b=offset,
        weights=lyapunov_weights(chain, rate),
        small_set=chain.indices(small),
    )
    report = verify_drift(chain, cert)
    if not report.ok:
        raise DriftViolationError(
            "pair drift fails pointwise", worst_slack=report.worst_slack
        )
    return BivariateDrift(level=level, small_set=small, offset=offset)


def bivariate_petiteness(inc: IncrementDistribution, level: int) -> PetitenessCertificate:
    """Access from the rays to (1, 1) within ``level`` steps by forced unit draws.

    A ray state (1, b) reaches (1, 1) in b - 1 unit draws; (1, 1) itself
    returns in one step when both fresh draws are 1.  The certified mass
    beta^level is checked against the exact infimum over the rays.
    """
    beta = float(inc.pmf[1])
    if beta <= 0.0:
        raise ValidationError("access by forced unit draws needs mass at increment 1")
    if level < 1:
        raise ValidationError(f"level must be >= 1, got {level}")
    mass = ONE if beta == 1.0 else LogReal(level * math.log(beta))
    chain = bivariate_chain(inc)
    rays = boundary_rays(inc.span, level)
    worst = access_probability(chain, rays, [(1, 1)], level)
    if worst < mass.to_float() - 1e-12:
        raise HypothesisFailError(
            "forced-path access mass is not met on the rays",
            exact_infimum=worst,
            claimed=mass.to_float(),
        )
    return PetitenessCertificate(
        steps=level, mass=mass, source=rays, target=((1, 1),)
    )


@dataclass(frozen=True)
class KendallBound:
    """Explicit geometric-convergence constants for a renewal sequence.

    Certifies sum_{n >= 0} r2^n |u(n) - 1/mean| <= gap_series_bound for
    every r2 up to 1 + rho_excess, evaluated at 1 + r2_excess.  All
    magnitudes are carried in log space; linear float views of the extreme
    entries may round to 1.0 or overflow and are for display only.
    """

    beta: float
    mgf_bound: LogReal
    rate_excess: LogReal
    eta_gap: LogReal
    fresh_rate_excess: LogReal
    drift_level: int
    drift_offset: LogReal
    return_sum_bound: LogReal
    access_mass: LogReal
    rho_excess: LogReal
    r2_excess: LogReal
    coefficient: LogReal
    gap_series_bound: LogReal

    def summary(self) -> dict:
        return {
            "beta": self.beta,
            "mgf_bound": float(self.mgf_bound),
            "rate": 1.0 + float(self.rate_excess),
            "eta": 1.0 - float(self.eta_gap),
            "drift_level": self.drift_level,
            "drift_offset": float(self.drift_offset),
            "return_sum_bound": float(self.return_sum_bound),
            "access_mass": float(self.access_mass),
            "rho": 1.0 + float(self.rho_excess),
            "r2": 1.0 + float(self.r2_excess),
            "coefficient": float(self.coefficient),
            "gap_series_bound": float(self.gap_series_bound),
            "log_rho_excess": self.rho_excess.log,
            "log_r2_excess": self.r2_excess.log,
            "log_coefficient": self.coefficient.log,
            "log_gap_series_bound": self.gap_series_bound.log,
        }


def kendall_constants(
    beta: float,
    mgf_bound: RateLike,
    rate_excess: RateLike,
    eta_gap: RateLike = None,
    r2_excess: RateLike = None,
) -> KendallBound:
    """Convergence constants from five numbers, no chain enumeration.

    Inputs: mass beta at increment 1, a bound B >= mgf(rate) on the
    increment transform, the rate excess rate - 1, optionally the drift gap
    1 - eta (default picks eta halfway between 1/rate and 1) and the output
    rate excess r2 - 1 (default: the certified ceiling).  B stands in for
    the exact transform everywhere it appears; every use is monotone, so
    the output constants are valid, only looser.

    The certified output rate is capped at 2: the closing lemma that turns
    coupling-time control into the gap series bound needs r2 <= 2, and
    rates past 2 have no practical value here.
    """
    if not 0.0 < beta <= 1.0:
        raise ValidationError(f"unit-increment mass must be in (0, 1], got {beta}")
    big = mgf_bound if isinstance(mgf_bound, LogReal) else LogReal.from_float(float(mgf_bound))
    eps = _as_excess(rate_excess)
    if eps.is_zero:
        raise RateRangeError("rate must exceed 1")
    one_plus = ONE + eps
    try:
        big_m1 = big - ONE
    except ValueError:
        raise ValidationError("transform bound must be >= the rate") from None
    if big_m1.is_zero or big_m1 < eps:
        raise ValidationError("transform bound must be >= the rate")

    if eta_gap is None:
        gap = eps / (one_plus * 2.0)
    else:
        gap = _as_excess(eta_gap)
    if gap.is_zero or gap >= ONE:
        raise EtaRangeError("eta must lie strictly inside (1/rate, 1)")
    try:
        den = eps - gap * one_plus  # eta * rate - 1
    except ValueError:
        raise EtaRangeError("eta must exceed 1/rate") from None
    if den.is_zero:
        raise EtaRangeError("eta must exceed 1/rate")

    clamp = 1 if beta == 1.0 else 2
    diff = big_m1 - eps if big_m1 > eps else None
    num = gap * one_plus if diff is None else diff + gap * one_plus  # B - eta * rate
    quotient = num / den
    log_r = log_of_rate(eps)
    if quotient.log <= 0.0:
        level = clamp
    else:
        raw = (LogReal.from_float(quotient.log) / log_r).to_float()
        if not math.isfinite(raw):
            raise ValidationError("drift level exceeds representable integers")
        level = max(clamp, math.ceil((raw + 1.0) * (1.0 + 1e-12)))

    power = exp_log(log_r * (level - 1))  # rate^(level-1)
    two_b = big * 2.0
    peak = two_b if two_b >= big + power else big + power
    offset = peak / (one_plus * 2.0)

    eta = ONE - gap
    if eta.is_zero:
        raise EtaRangeError("eta must lie strictly inside (1/rate, 1)")
    fresh = gap / (eta * 2.0)  # fresh rate (1 + 1/eta)/2, as an excess
    half_gap = gap * 0.5  # 1 - eta * fresh_rate, exactly
    m0 = (ONE + (ONE + fresh) * offset) / half_gap * (ONE + power) * 0.5

    try:
        mass = ONE if beta == 1.0 else LogReal(level * math.log(beta))
    except OverflowError:
        raise ValidationError("access mass underflows the log representation") from None
    petite = PetitenessCertificate(steps=level, mass=mass)

    rho_raw = transfer_rate_limit(m0, fresh, petite)
    rho = rho_raw if rho_raw < ONE else ONE
    if r2_excess is None:
        eps2 = rho
    else:
        eps2 = _as_excess(r2_excess)
        if eps2 > rho:
            raise R2TooLargeError(
                "output rate exceeds the certifiable ceiling",
                rho_excess_log=rho.log,
                requested_excess_log=eps2.log,
            )
    result = transfer_bound(m0, fresh, petite, eps2)
    coeff = result.coefficient
    series = coeff * big * (ONE + eps2) ** 2 / ((eps2 ** 3) * 2.0)
    return KendallBound(
        beta=beta,
        mgf_bound=big,
        rate_excess=eps,
        eta_gap=gap,
        fresh_rate_excess=fresh,
        drift_level=level,
        drift_offset=offset,
        return_sum_bound=m0,
        access_mass=mass,
        rho_excess=rho,
        r2_excess=eps2,
        coefficient=coeff,
        gap_series_bound=series,
    )


@dataclass(frozen=True)
class KendallVerifyReport:
    ok: bool
    partial_sum: float
    tail_bound: float
    total_log: float
    bound_log: float
    per_delay_ok: bool


def coupling_tail(inc: IncrementDistribution, horizon: int) -> np.ndarray:
    """Exact P{T > n}, n = 0..horizon, fresh copy against stationary delay."""
    chain = bivariate_chain(inc)
    delays = stationary_delay(inc, max(0, inc.span - 1))
    tail = np.zeros(horizon + 1)
    for w in range(1, inc.span):
        if delays[w] == 0.0:
            continue
        law = hitting_law(chain, (1, w + 1), [(1, 1)], horizon)
        tail += delays[w] * (1.0 - law.cdf())
    return tail


def kendall_verify(
    inc: IncrementDistribution, bound: KendallBound, horizon: int
) -> KendallVerifyReport:
    """Exact partial gap series plus a certified tail against the bound.

    The tail rides on Markov's inequality at a rate halfway between r2 and
    the divergence threshold of the pair chain, so the comparison covers
    the whole series, not just the first ``horizon`` terms.  Also checks
    the per-delay transform bound for each feasible initial delay.
    """
    r2 = 1.0 + float(bound.r2_excess)
    u = renewal_sequence(inc, horizon)
    gaps = np.abs(u - long_run_rate(inc))
    partial = float(gaps @ np.power(r2, np.arange(horizon + 1)))

    if inc.span == 1:  # coupling is instantaneous, the gap series is 0
        return KendallVerifyReport(
            ok=True,
            partial_sum=partial,
            tail_bound=0.0,
            total_log=-math.inf,
            bound_log=bound.gap_series_bound.log,
            per_delay_ok=True,
        )

    pair = bivariate_chain(inc)
    r_crit = 1.0 / taboo_spectral_radius(pair, [(1, 1)])
    if r2 >= r_crit:
        raise DivergentExpectationError(
            "rate reaches the divergence threshold of the pair chain",
            rate=r2,
            threshold=r_crit,
        )
    r3 = 0.5 * (r2 + r_crit)
    mgf3 = hitting_mgf_all(pair, [(1, 1)], r3)
    delays = stationary_delay(inc, max(0, inc.span - 1))
    e3 = delays[0]
    for w in range(1, inc.span):
        e3 += delays[w] * mgf3[pair.index((1, w + 1))]
    ratio = r2 / r3
    tail = e3 / r3 * ratio ** (horizon + 1) / (1.0 - ratio)

    total_log = math.log(partial + tail)
    bound_log = bound.gap_series_bound.log
    ok = total_log <= bound_log + 1e-9

    log_r2 = math.log(r2)
    base_log = bound.coefficient.log + log_r2 - math.log(2.0 * (r2 - 1.0)) if r2 > 1.0 else math.inf
    mgf2 = hitting_mgf_all(pair, [(1, 1)], r2)
    per_delay_ok = True
    for w in range(inc.span):
        exact = 1.0 if w == 0 else float(mgf2[pair.index((1, w + 1))])
        per_delay_ok &= math.log(exact) <= base_log + w * log_r2 + 1e-9
    return KendallVerifyReport(
        ok=bool(ok),
        partial_sum=partial,
        tail_bound=float(tail),
        total_log=total_log,
        bound_log=bound_log,
        per_delay_ok=bool(per_delay_ok),
    )
