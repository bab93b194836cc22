"""Drift certificates, return-sum bounds, and the rate-transfer argument."""

import math

import numpy as np
import pytest

from ergobounds.chain import FiniteChain, WeightFunction, mgf_weighted_sum_all
from ergobounds.drift import (
    DriftCertificate,
    PetitenessCertificate,
    access_probability,
    drift_mgf_bound,
    drift_tail_bound,
    fit_drift,
    midpoint_rate_excess,
    transfer_bound,
    transfer_rate_limit,
    verify_drift,
    verify_petiteness,
    verify_weighted_sum_bound,
)
from ergobounds.errors import (
    NoContractionError,
    R2TooLargeError,
    RateRangeError,
    ValidationError,
)
from ergobounds.logspace import ONE, LogReal


def test_mgf_bound_hand_values():
    # (1 + 0) / (1 - 0.75) * 1 and (1 + 1.5) / (1 - 0.75) * 2
    assert math.isclose(float(drift_mgf_bound(0.5, 0.0, 0.5, 1.0)), 4.0, rel_tol=1e-12)
    assert math.isclose(float(drift_mgf_bound(0.5, 1.0, 0.5, 2.0)), 20.0, rel_tol=1e-12)


def test_mgf_bound_rejects_rates_past_contraction():
    with pytest.raises(RateRangeError):
        drift_mgf_bound(0.5, 0.0, 1.0)  # lam * r = 1 exactly
    with pytest.raises(RateRangeError):
        drift_mgf_bound(0.5, 0.0, 1.5)
    with pytest.raises(ValidationError):
        drift_mgf_bound(0.5, 0.0, 0.5, weight_at_start=0.5)


def test_fitted_certificates_verify_and_are_tight(chain_corpus):
    for chain, weights, cert in chain_corpus:
        report = verify_drift(chain, cert)
        assert report.ok
        assert math.isclose(report.measured_lam, cert.lam, rel_tol=1e-12)
        assert abs(report.measured_b - cert.b) <= 1e-12 * max(1.0, cert.b)


def test_fit_drift_rejects_frozen_chain():
    chain = FiniteChain(np.eye(2))
    weights = WeightFunction([2.0, 1.0])
    with pytest.raises(NoContractionError):
        fit_drift(chain, weights, [0])


def test_drift_tail_bound_dominates_exact(chain_corpus):
    for chain, weights, cert in chain_corpus:
        eps = 0.5 * (1.0 / cert.lam - 1.0)
        bound = drift_tail_bound(cert, eps)
        report = verify_weighted_sum_bound(chain, weights, list(cert.small_set), bound)
        assert report.ok, report


def test_uniform_small_set_hypothesis(chain_corpus):
    # the tail-bound coefficient alone covers starts inside the small set
    for chain, weights, cert in chain_corpus[:8]:
        eps = 0.5 * (1.0 / cert.lam - 1.0)
        bound = drift_tail_bound(cert, eps)
        exact = mgf_weighted_sum_all(chain, weights, list(cert.small_set), 1.0 + eps)
        inside = exact[list(cert.small_set)].max()
        assert math.log(inside) <= bound.coefficient.log + 1e-9


def _transfer_setup(chain, weights, cert):
    eps1 = LogReal.from_float(0.5 * (1.0 / cert.lam - 1.0))
    hypo = drift_tail_bound(cert, eps1)
    source = [chain.states[i] for i in cert.small_set]
    target_idx = int(np.argmax(weights.values))
    target = [chain.states[target_idx]]
    steps = chain.n_states
    mass = access_probability(chain, source, target, steps)
    petite = PetitenessCertificate(
        steps=steps, mass=mass, source=tuple(source), target=tuple(target)
    )
    return eps1, hypo, petite, target


def test_transfer_bound_dominates_exact(chain_corpus):
    for chain, weights, cert in chain_corpus:
        eps1, hypo, petite, target = _transfer_setup(chain, weights, cert)
        rho = transfer_rate_limit(hypo.coefficient, eps1, petite)
        for frac in (0.2, 0.5, 0.9, 0.99, 1.0):
            tb = transfer_bound(hypo.coefficient, eps1, petite, rho * frac)
            report = verify_weighted_sum_bound(chain, weights, target, tb)
            assert report.ok, (report, frac)


def test_transfer_rejects_rates_past_ceiling(chain_corpus):
    chain, weights, cert = chain_corpus[0]
    eps1, hypo, petite, _ = _transfer_setup(chain, weights, cert)
    rho = transfer_rate_limit(hypo.coefficient, eps1, petite)
    with pytest.raises(R2TooLargeError):
        transfer_bound(hypo.coefficient, eps1, petite, rho * 1.01)
    with pytest.raises(R2TooLargeError):
        transfer_bound(hypo.coefficient, eps1, petite, eps1)


def test_transfer_defaults_to_ceiling(chain_corpus):
    chain, weights, cert = chain_corpus[1]
    eps1, hypo, petite, target = _transfer_setup(chain, weights, cert)
    tb = transfer_bound(hypo.coefficient, eps1, petite)
    assert tb.rate_excess == tb.rho_excess
    assert math.isfinite(tb.coefficient.log)
    report = verify_weighted_sum_bound(chain, weights, target, tb)
    assert report.ok


def test_transfer_monotonicity():
    eps1 = LogReal.from_float(0.5)
    base = dict(m0=5.0, steps=3, mass=0.3)
    rho0 = transfer_rate_limit(base["m0"], eps1, PetitenessCertificate(base["steps"], base["mass"]))
    r2 = rho0 * 0.25

    def coeff(m0, steps, mass):
        pet = PetitenessCertificate(steps=steps, mass=mass)
        return transfer_bound(m0, eps1, pet, r2).coefficient

    ref = coeff(**base)
    assert coeff(8.0, 3, 0.3) > ref  # larger return sums cost more
    assert coeff(5.0, 5, 0.3) > ref  # more steps to access cost more
    assert coeff(5.0, 3, 0.6) < ref  # better access helps

    def rho(m0, steps, mass):
        return transfer_rate_limit(m0, eps1, PetitenessCertificate(steps, mass))

    assert rho(8.0, 3, 0.3) < rho0
    assert rho(5.0, 5, 0.3) < rho0
    assert rho(5.0, 3, 0.6) > rho0


def test_transfer_full_mass_closed_form():
    # G = 1 + 0.5 * 3 = 2.5; D = 3 (1 + 2.5 + 2.5^2) = 29.25 at r2 = r1
    petite = PetitenessCertificate(steps=2, mass=1.0)
    tb = transfer_bound(3.0, 0.5, petite)
    assert tb.rho_excess == LogReal.from_float(0.5)
    assert math.isclose(float(tb.coefficient), 29.25, rel_tol=1e-12)
    with pytest.raises(R2TooLargeError):
        transfer_bound(3.0, 0.5, petite, 0.6)


def test_transfer_survives_extreme_magnitudes():
    # the regime where linear float64 would read gamma = 1.0 and D = inf
    m0 = LogReal(1e4)
    eps1 = LogReal(-50.0)
    petite = PetitenessCertificate(steps=10**6, mass=LogReal(-1e5))
    rho = transfer_rate_limit(m0, eps1, petite)
    assert rho.log < eps1.log
    tb = transfer_bound(m0, eps1, petite)
    assert math.isfinite(tb.coefficient.log)
    assert float(tb.rate_excess) == 0.0  # underflows linearly, carried in logs


def test_petiteness_exact_infimum(chain_corpus):
    chain, weights, cert = chain_corpus[2]
    eps1, hypo, petite, target = _transfer_setup(chain, weights, cert)
    report = verify_petiteness(chain, petite)
    assert report.ok
    assert math.isclose(report.worst_mass, petite.mass_float, rel_tol=1e-12)
    too_greedy = PetitenessCertificate(
        steps=petite.steps,
        mass=min(1.0, petite.mass_float * 1.5),
        source=petite.source,
        target=petite.target,
    )
    assert not verify_petiteness(chain, too_greedy).ok


def test_mass_validation():
    with pytest.raises(ValidationError):
        PetitenessCertificate(steps=0, mass=0.5)
    with pytest.raises(ValidationError):
        PetitenessCertificate(steps=1, mass=0.0)
    with pytest.raises(ValidationError):
        PetitenessCertificate(steps=1, mass=1.5)
    with pytest.raises(ValidationError):
        PetitenessCertificate(steps=1, mass=LogReal(0.5))


def test_determinism_bit_for_bit():
    petite = PetitenessCertificate(steps=4, mass=0.25)
    a = transfer_bound(7.0, 0.3, petite)
    b = transfer_bound(7.0, 0.3, petite)
    assert a.coefficient.log == b.coefficient.log
    assert a.rho_excess.log == b.rho_excess.log


def test_midpoint_rate():
    assert math.isclose(float(midpoint_rate_excess(LogReal.from_float(0.5))), 0.25, rel_tol=1e-15)
    with pytest.raises(RateRangeError):
        midpoint_rate_excess(LogReal.from_float(0.0))
