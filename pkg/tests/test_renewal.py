import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from ergobounds.errors import ValidationError
from ergobounds.renewal import (
    IncrementDistribution,
    delayed_renewal,
    kendall_gap_profile,
    long_run_rate,
    renewal_sequence,
    stationary_delay,
)

HALF_HALF = IncrementDistribution([0.5, 0.5])


def test_renewal_sequence_frozen():
    np.testing.assert_allclose(
        renewal_sequence(HALF_HALF, 4),
        [1.0, 0.5, 0.75, 0.625, 0.6875],
        atol=1e-15,
    )


def test_stationary_delay_frozen():
    # mean 1.5; tails 1 and 1/2.
    np.testing.assert_allclose(
        stationary_delay(HALF_HALF, 3), [2 / 3, 1 / 3, 0.0, 0.0], atol=1e-15
    )
    assert abs(long_run_rate(HALF_HALF) - 2 / 3) < 1e-15


def test_increment_mgf_frozen():
    assert abs(HALF_HALF.mgf(1.2) - 1.32) < 1e-15
    assert abs(HALF_HALF.mgf(1.0) - 1.0) < 1e-15


def test_stationary_delay_flattens():
    e = stationary_delay(HALF_HALF, 1)
    v = delayed_renewal(HALF_HALF, e, 40)
    np.testing.assert_allclose(v, np.full(41, 2 / 3), atol=1e-14)


def test_zero_delay_recovers_pure_sequence():
    np.testing.assert_allclose(
        delayed_renewal(HALF_HALF, [1.0], 10), renewal_sequence(HALF_HALF, 10)
    )


def test_renewal_converges_to_rate():
    inc = IncrementDistribution([0.2, 0.5, 0.3])
    gap = kendall_gap_profile(inc, 200)
    assert gap[200] < 1e-12
    assert abs(renewal_sequence(inc, 200)[200] - long_run_rate(inc)) < 1e-12


def test_validation():
    with pytest.raises(ValidationError):
        IncrementDistribution([0.5, 0.4])
    with pytest.raises(ValidationError):
        IncrementDistribution([1.2, -0.2])
    with pytest.raises(ValidationError):
        IncrementDistribution([])
    # Support {2} has period 2; no aperiodic limit exists.
    with pytest.raises(ValidationError):
        IncrementDistribution([0.0, 1.0])
    with pytest.raises(ValidationError):
        IncrementDistribution([0.0, 0.5, 0.0, 0.5])


def test_span_ignores_trailing_zeros():
    inc = IncrementDistribution([0.5, 0.5, 0.0, 0.0])
    assert inc.span == 2
    assert inc.tail(2) == 0.0


@seed(13)
@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=1, max_size=5))
def test_flat_identity_randomized(weights):
    # Force mass at 1 so support is aperiodic, then normalize.
    w = np.asarray(weights)
    inc = IncrementDistribution(w / w.sum())
    u = renewal_sequence(inc, 60)
    assert np.all(u >= 0.0) and np.all(u <= 1.0 + 1e-12)
    e = stationary_delay(inc, max(inc.span - 1, 0))
    v = delayed_renewal(inc, e, 60)
    np.testing.assert_allclose(v, np.full(61, long_run_rate(inc)), atol=1e-12)
