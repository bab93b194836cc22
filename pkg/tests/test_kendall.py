"""Coupled renewal pair: kernel, drift, access, and the constants pipeline."""

import dataclasses
import math

import numpy as np
import pytest

from ergobounds.drift import verify_drift, DriftCertificate, verify_petiteness
from ergobounds.errors import (
    EtaRangeError,
    HypothesisFailError,
    R2TooLargeError,
    ValidationError,
)
from ergobounds.kendall import (
    bivariate_chain,
    bivariate_drift,
    bivariate_petiteness,
    boundary_rays,
    coupling_tail,
    kendall_constants,
    kendall_verify,
    lyapunov_value,
    lyapunov_weights,
)
from ergobounds.logspace import LogReal
from ergobounds.renewal import IncrementDistribution, long_run_rate, renewal_sequence

HALF = IncrementDistribution([0.5, 0.5])

TRIPLES = [
    (HALF, 1.2, 0.9),
    (HALF, 1.1, 0.95),
    (IncrementDistribution([0.3, 0.7]), 1.15, 0.93),
    (IncrementDistribution([0.2, 0.5, 0.3]), 1.1, 0.95),
    (IncrementDistribution([0.6, 0.0, 0.4]), 1.08, 0.96),
    (IncrementDistribution([0.25, 0.25, 0.25, 0.25]), 1.05, 0.97),
    (IncrementDistribution([0.1, 0.9]), 1.3, 0.85),
    (IncrementDistribution([0.4, 0.1, 0.1, 0.4]), 1.06, 0.97),
    (IncrementDistribution([0.15, 0.35, 0.5]), 1.12, 0.94),
    (IncrementDistribution([0.5, 0.2, 0.2, 0.05, 0.05]), 1.04, 0.98),
]


def test_kernel_rows_frozen():
    chain = bivariate_chain(HALF)
    # (1,2): the fresh copy redraws, the delayed copy ticks to 1
    row = chain.matrix[chain.index((1, 2))]
    expect = {(1, 1): 0.5, (2, 1): 0.5}
    for j, s in enumerate(chain.states):
        assert row[j] == expect.get(s, 0.0)
    # (1,1): independent redraw on both sides
    row = chain.matrix[chain.index((1, 1))]
    assert np.allclose(row, 0.25)
    # (2,2): deterministic double tick
    row = chain.matrix[chain.index((2, 2))]
    assert row[chain.index((1, 1))] == 1.0 and row.sum() == 1.0


def test_drift_identities_exact():
    for inc, rate, eta in TRIPLES:
        chain = bivariate_chain(inc)
        v = lyapunov_weights(chain, rate).values
        pv = chain.matrix @ v
        s = inc.mgf(rate)
        for i, (a, b) in enumerate(chain.states):
            if a > 1 and b > 1:
                expect = lyapunov_value(a, b, rate) / rate
            elif a == 1 and b == 1:
                expect = s / rate
            elif a == 1:
                expect = 0.5 * (s / rate + rate ** (b - 2))
            else:
                expect = 0.5 * (s / rate + rate ** (a - 2))
            assert abs(pv[i] - expect) <= 1e-12 * max(1.0, expect)


def test_drift_constants_frozen():
    # (1.32 - 1.08) / (1.08 - 1) = 3; ln 3 / ln 1.2 + 1 = 7.026 -> level 8
    drift = bivariate_drift(HALF, 1.2, 0.9)
    assert drift.level == 8
    assert math.isclose(drift.offset, 4.9031808 / 2.4, rel_tol=1e-12)
    assert set(drift.small_set) == {(1, 1), (1, 2), (2, 1)}


def test_drift_certificate_verifies(chain_corpus):
    for inc, rate, eta in TRIPLES:
        drift = bivariate_drift(inc, rate, eta)
        chain = bivariate_chain(inc)
        cert = DriftCertificate(
            lam=eta,
            b=drift.offset,
            weights=lyapunov_weights(chain, rate),
            small_set=chain.indices(drift.small_set),
        )
        assert verify_drift(chain, cert).ok


def test_petiteness_frozen():
    pet = bivariate_petiteness(HALF, 8)
    assert pet.steps == 8
    assert math.isclose(pet.mass_float, 1.0 / 256.0, rel_tol=1e-12)
    assert verify_petiteness(bivariate_chain(HALF), pet).ok


def test_petiteness_level_one_fails_for_partial_mass():
    # from (1,1) the one-step return has mass 0.25 < 0.5
    with pytest.raises(HypothesisFailError):
        bivariate_petiteness(HALF, 1)


def test_petiteness_degenerate_unit_increment():
    inc = IncrementDistribution([1.0])
    pet = bivariate_petiteness(inc, 1)
    assert pet.mass_float == 1.0


def test_constants_frozen_oracle():
    bound = kendall_constants(0.5, 1.32, 0.2, eta_gap=0.1)
    assert bound.drift_level == 8
    assert math.isclose(float(bound.drift_offset), 2.042992, rel_tol=1e-12)
    assert math.isclose(float(bound.access_mass), 1.0 / 256.0, rel_tol=1e-12)
    fresh = 0.1 / 1.8
    m0 = (1.0 + (1.0 + fresh) * 2.042992) / 0.05 * (1.0 + 1.2**7) / 2.0
    assert math.isclose(float(bound.return_sum_bound), m0, rel_tol=1e-10)
    assert math.isclose(float(bound.fresh_rate_excess), fresh, rel_tol=1e-12)
    assert 0.0 < float(bound.rho_excess) < 0.2
    assert math.isfinite(bound.gap_series_bound.log)


def test_constants_match_chain_level_drift():
    # same level on the arithmetic-only route when B is the exact transform
    for inc, rate, eta in TRIPLES:
        drift = bivariate_drift(inc, rate, eta)
        bound = kendall_constants(
            float(inc.pmf[1]), inc.mgf(rate), rate - 1.0, eta_gap=1.0 - eta
        )
        assert bound.drift_level == drift.level
        assert math.isclose(float(bound.drift_offset), drift.offset, rel_tol=1e-9)


def test_series_bound_holds_on_corpus():
    for inc, rate, eta in TRIPLES:
        base = kendall_constants(
            float(inc.pmf[1]), inc.mgf(rate), rate - 1.0, eta_gap=1.0 - eta
        )
        bound = kendall_constants(
            float(inc.pmf[1]),
            inc.mgf(rate),
            rate - 1.0,
            eta_gap=1.0 - eta,
            r2_excess=base.rho_excess * 0.9,
        )
        report = kendall_verify(inc, bound, horizon=200)
        assert report.ok, (inc.pmf, report)
        assert report.per_delay_ok


def test_gap_dominated_by_coupling_tail():
    for inc, _, _ in TRIPLES:
        u = renewal_sequence(inc, 200)
        gap = np.abs(u - long_run_rate(inc))
        tail = coupling_tail(inc, 200)
        assert np.all(gap <= tail + 1e-13)


def test_coupling_equality_at_step_one():
    tail = coupling_tail(HALF, 5)
    u = renewal_sequence(HALF, 5)
    gap1 = abs(u[1] - long_run_rate(HALF))
    assert math.isclose(gap1, 1.0 / 6.0, rel_tol=1e-14)
    assert math.isclose(tail[1], 1.0 / 6.0, rel_tol=1e-14)


def test_verify_catches_corrupted_bound():
    bound = kendall_constants(0.5, 1.32, 0.2, eta_gap=0.1)
    bad = dataclasses.replace(bound, gap_series_bound=LogReal.from_float(1e-8))
    report = kendall_verify(HALF, bad, horizon=200)
    assert not report.ok


def test_rate_and_eta_validation():
    with pytest.raises(EtaRangeError):
        kendall_constants(0.5, 1.32, 0.2, eta_gap=0.2)  # eta = 0.8 < 1/1.2
    with pytest.raises(ValidationError):
        kendall_constants(0.5, 1.1, 0.2)  # transform bound below the rate
    with pytest.raises(R2TooLargeError):
        kendall_constants(0.5, 1.32, 0.2, eta_gap=0.1, r2_excess=0.5)
    with pytest.raises(ValidationError):
        kendall_constants(0.0, 1.32, 0.2)


def test_boundary_rays_clip_to_span():
    assert boundary_rays(2, 8) == ((1, 1), (1, 2), (2, 1))
    assert boundary_rays(3, 2) == ((1, 1), (1, 2), (2, 1))


def test_extreme_regime_stays_finite():
    bound = kendall_constants(0.05, 50.0, LogReal(-30.0))
    assert bound.drift_level > 10**12
    assert math.isfinite(bound.gap_series_bound.log)
    assert bound.rho_excess.log < -30.0
    assert float(bound.rho_excess) == 0.0  # far below linear float resolution


def test_determinism_bit_for_bit():
    a = kendall_constants(0.5, 1.32, 0.2, eta_gap=0.1)
    b = kendall_constants(0.5, 1.32, 0.2, eta_gap=0.1)
    assert a.gap_series_bound.log == b.gap_series_bound.log
    assert a.rho_excess.log == b.rho_excess.log
    assert a.drift_level == b.drift_level
