"""End-to-end pipeline: drift + minorization to explicit convergence constants.

Input: five numbers and two weight sups describing a chain that (i) drifts
into a small set C, (ii) admits a minorization with mass delta on a set U,
and (iii) reaches U from C within a known number of steps with known
probability.  Output: explicit D and a rate r > 1 with

    ||P^n(x, .) - pi||_V <= D V(x) r^(-n)      for every x and n.

The route: drift gives rate-weighted return sums to C; the rate-transfer
argument converts access C -> U into return sums to U; splitting U turns
the minorization into an atom, costing a factor 2/(2-delta) and a one-step
access mass delta^2/(2(2-delta)); a second transfer controls returns to
the atom; atom returns drive a renewal sequence whose unit-step mass is
exactly delta/2, so the coupled-pair machinery bounds its convergence; and
a regeneration decomposition stitches the pieces back together.  Stages
pick the midpoint of each certified rate interval, so the final rate is
below every intermediate one and all earlier constants stay valid.

Every stage is plain log-space arithmetic: identical inputs give
bit-identical constants.  The final rate excess is often far below float64
resolution (gamma displays as 1.0); comparisons against exact distances
run on logarithms, where it is perfectly finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

from .chain import FiniteChain, WeightFunction, stationary, vnorm_profile
from .drift import (
    DriftCertificate,
    PetitenessCertificate,
    access_probability,
    fit_drift,
    transfer_bound,
    verify_drift,
)
from .errors import BoundViolationError, HypothesisFailError, ValidationError
from .kendall import KendallBound, kendall_constants
from .logspace import ONE, LogReal, log_of_rate
from .splitting import MinorizationCertificate, atom_access_bound, fit_minorization, verify_minorization


@dataclass(frozen=True)
class HarrisInputs:
    """The hypothesis bundle: drift, minorization mass, access, weight sups.

    lam, b: drift of V into the small set C.  delta: minorization mass on
    U.  access_steps, access_mass: from every state of C, U is reached
    within access_steps with probability at least access_mass.  small_sup
    and minorized_sup are upper bounds for V over C and over U.
    """

    lam: float
    b: float
    delta: float
    access_steps: int
    access_mass: Union[float, LogReal]
    small_sup: float
    minorized_sup: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValidationError(f"contraction factor must be in (0, 1), got {self.lam}")
        if self.b < 0.0:
            raise ValidationError(f"drift offset must be >= 0, got {self.b}")
        if not 0.0 < self.delta <= 1.0:
            raise ValidationError(f"minorization mass must be in (0, 1], got {self.delta}")
        if self.access_steps < 1:
            raise ValidationError("access step count must be >= 1")
        if self.small_sup < 1.0 or self.minorized_sup < 1.0:
            raise ValidationError("weight sups must be >= 1 (weights are >= 1)")


@dataclass(frozen=True)
class HarrisBound:
    """||P^n(x, .) - pi||_V <= coefficient * V(x) * (1 + rate_excess)^(-n)."""

    inputs: HarrisInputs
    rate_excess: LogReal
    coefficient: LogReal
    renewal: KendallBound = field(repr=False)
    trace: dict = field(repr=False)

    @property
    def gamma(self) -> float:
        """Linear decay factor; rounds to 1.0 when the excess underflows."""
        return 1.0 / (1.0 + float(self.rate_excess))

    @property
    def log_rate(self) -> float:
        """ln(1 + rate_excess) as a float, exact in the tiny-excess regime."""
        return log_of_rate(self.rate_excess).to_float()

    def summary(self) -> dict:
        out = {
            "gamma": self.gamma,
            "log_rate": self.log_rate,
            "coefficient": float(self.coefficient),
            "log_coefficient": self.coefficient.log,
            "log_rate_excess": self.rate_excess.log,
        }
        for key, val in self.trace.items():
            out[key] = float(val) if isinstance(val, LogReal) else val
            if isinstance(val, LogReal):
                out["log_" + key] = val.log
        return out


def harris_constants(inputs: HarrisInputs) -> HarrisBound:
    """Run the five-stage pipeline; bit-identical outputs for equal inputs."""
    lam, b, delta = inputs.lam, inputs.b, inputs.delta
    m_c = LogReal.from_float(inputs.small_sup)
    m_u = LogReal.from_float(inputs.minorized_sup)

    # return sums to C at the rate halfway to 1/lam; 1 - lam r is (1-lam)/2
    eps1 = LogReal.from_float((1.0 - lam) / (2.0 * lam))
    margin1 = LogReal.from_float((1.0 - lam) * 0.5)
    m0_small = (ONE + (ONE + eps1) * b) / margin1 * m_c

    petite_set = PetitenessCertificate(steps=inputs.access_steps, mass=inputs.access_mass)
    eps2 = transfer_bound(m0_small, eps1, petite_set).rho_excess * 0.5
    d_set = transfer_bound(m0_small, eps1, petite_set, eps2).coefficient

    # lift to the split chain: one conditioned step costs 2/(2-delta), and
    # the atom is reached from the set copies in one step
    m0_atom = d_set * m_u * (2.0 / (2.0 - delta))
    petite_atom = PetitenessCertificate(steps=1, mass=atom_access_bound(delta))
    eps3 = transfer_bound(m0_atom, eps2, petite_atom).rho_excess * 0.5
    d_atom = transfer_bound(m0_atom, eps2, petite_atom, eps3).coefficient

    # atom returns as a renewal process: unit mass delta/2, transform bound
    transform_atom = ONE + eps3 * d_atom * m_u
    probe = kendall_constants(0.5 * delta, transform_atom, eps3)
    eps_final = probe.rho_excess * 0.5
    renewal = kendall_constants(0.5 * delta, transform_atom, eps3, r2_excess=eps_final)

    # regeneration decomposition at the final rate r = 1 + eps_final:
    #   head: paths not yet regenerated, plus the landing term;
    #   cycle tail: the stationary part of unfinished cycles;
    #   renewal error: |u - rate| convolved against cycle weights.
    growth = ONE + eps_final * d_atom
    c_head = m_u * growth + d_atom
    c_cycle = m_u * (transform_atom + d_atom)
    c_renewal = c_cycle * (ONE + renewal.gap_series_bound) * growth
    coefficient = c_head + c_renewal + c_cycle

    trace = {
        "rate_small_excess": eps1,
        "return_sum_small": m0_small,
        "rate_set_excess": eps2,
        "coefficient_set": d_set,
        "return_sum_atom": m0_atom,
        "rate_atom_excess": eps3,
        "coefficient_atom": d_atom,
        "transform_atom": transform_atom,
        "rho_renewal_excess": renewal.rho_excess,
        "gap_series_bound": renewal.gap_series_bound,
        "assembly_head": c_head,
        "assembly_cycle": c_cycle,
        "assembly_renewal": c_renewal,
    }
    return HarrisBound(
        inputs=inputs,
        rate_excess=eps_final,
        coefficient=coefficient,
        renewal=renewal,
        trace=trace,
    )


@dataclass(frozen=True)
class HypothesisReport:
    ok: bool
    drift_slack: float
    minorization_slack: float
    access_inf: float
    small_sup: float
    minorized_sup: float


def verify_hypotheses(
    chain: FiniteChain,
    weights: WeightFunction,
    small_set,
    minorization: MinorizationCertificate,
    inputs: HarrisInputs,
) -> HypothesisReport:
    """Check every pipeline hypothesis exactly; raise HYPOTHESIS_FAIL naming the clause."""
    small_idx = chain.indices(small_set)
    drift = verify_drift(
        chain,
        DriftCertificate(lam=inputs.lam, b=inputs.b, weights=weights, small_set=small_idx),
    )
    if not drift.ok:
        raise HypothesisFailError("drift inequality fails", clause="drift", slack=drift.worst_slack)

    at_claimed = MinorizationCertificate(
        delta=inputs.delta, small_set=minorization.small_set, measure=minorization.measure
    )
    minor = verify_minorization(chain, at_claimed)
    if not minor.ok:
        raise HypothesisFailError(
            "minorization fails at the claimed mass", clause="minorization", slack=minor.worst_slack
        )

    access = access_probability(chain, small_set, minorization.small_set, inputs.access_steps)
    mass = inputs.access_mass
    mass_f = mass.to_float() if isinstance(mass, LogReal) else float(mass)
    if access < mass_f - 1e-12:
        raise HypothesisFailError(
            "set-to-set access mass is not met", clause="petiteness", exact_infimum=access
        )

    true_small = weights.max_over(small_idx)
    true_minor = weights.max_over(chain.indices(minorization.small_set))
    if true_small > inputs.small_sup * (1.0 + 1e-12):
        raise HypothesisFailError(
            "small-set weight sup is understated", clause="small_sup", true_sup=true_small
        )
    if true_minor > inputs.minorized_sup * (1.0 + 1e-12):
        raise HypothesisFailError(
            "minorized-set weight sup is understated", clause="minorized_sup", true_sup=true_minor
        )
    return HypothesisReport(
        ok=True,
        drift_slack=drift.worst_slack,
        minorization_slack=minor.worst_slack,
        access_inf=access,
        small_sup=true_small,
        minorized_sup=true_minor,
    )


def fit_harris_inputs(chain: FiniteChain, weights: WeightFunction, small_set):
    """Measure a full hypothesis bundle on a chain, minorizing the small set itself."""
    cert = fit_drift(chain, weights, small_set)
    minor = fit_minorization(chain, small_set)
    steps = chain.n_states
    mass = access_probability(chain, small_set, small_set, steps)
    sup = weights.max_over(chain.indices(small_set))
    inputs = HarrisInputs(
        lam=cert.lam,
        b=cert.b,
        delta=minor.delta,
        access_steps=steps,
        access_mass=mass,
        small_sup=sup,
        minorized_sup=sup,
    )
    return inputs, minor


@dataclass(frozen=True)
class DistanceReport:
    ok: bool
    worst_log_margin: float
    worst_source: int
    worst_step: int


def verify_harris_bound(
    chain: FiniteChain,
    weights: WeightFunction,
    bound: HarrisBound,
    horizon: int,
    log_tol: float = 1e-9,
) -> DistanceReport:
    """Exact V-norm distances against D V(x) r^(-n), compared on logarithms.

    When the rate excess underflows linearly, ln r evaluates exactly in log
    space; a violation raises BOUND_VIOLATION with its location.
    """
    pi = stationary(chain)
    log_coeff = bound.coefficient.log
    log_rate = bound.log_rate
    worst = (-math.inf, -1, -1)
    for i in range(chain.n_states):
        logv = math.log(weights.values[i])
        profile = vnorm_profile(chain, weights, chain.states[i], horizon, stationary_dist=pi)
        for n in range(1, horizon + 1):
            dist = profile[n]
            if dist == 0.0:
                continue
            margin = math.log(dist) - (log_coeff + logv - n * log_rate)
            if margin > worst[0]:
                worst = (margin, i, n)
    ok = worst[0] <= log_tol
    if not ok:
        raise BoundViolationError(
            "exact distance exceeds the certified bound",
            log_margin=worst[0],
            source=chain.states[worst[1]],
            step=worst[2],
        )
    return DistanceReport(ok=True, worst_log_margin=worst[0], worst_source=worst[1], worst_step=worst[2])
