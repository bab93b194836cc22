"""Discrete renewal sequences on the positive integers.

An increment law p on {1..L} drives the pure renewal sequence

    u(0) = 1,   u(n) = sum_{k=1}^{min(n, L)} p(k) u(n-k),

which is the probability of a renewal at time n.  The stationary delay law
e(n) = P{T > n} / E[T] makes the delayed sequence exactly flat at 1 / E[T],
the long-run renewal rate.  Coupling a zero-delay copy against a
stationary-delay copy turns |u(n) - 1/E[T]| into a coupling-time tail; the
bivariate machinery for that lives in the kendall module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import RateRangeError, ValidationError

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class IncrementDistribution:
    """A probability law on {1..L} with aperiodic support.

    Constructed from ``probs`` where ``probs[k-1]`` is the mass at k.
    Internally padded so that ``pmf[k]`` is the mass at k and ``pmf[0]`` is 0.
    """

    pmf: np.ndarray = field(repr=False)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("increment law must be a nonempty vector")
        if np.any(p < 0):
            raise ValidationError(f"increment masses must be >= 0, min is {p.min()}")
        total = float(p.sum())
        if abs(total - 1.0) > _MASS_TOL:
            raise ValidationError(
                f"increment masses sum to {total!r}, outside 1 +/- {_MASS_TOL}"
            )
        support = [k + 1 for k in range(p.size) if p[k] > 0]
        if not support:
            raise ValidationError("increment law has empty support")
        g = 0
        for k in support:
            g = gcd(g, k)
        if g != 1:
            raise ValidationError(
                f"increment support has period {g}; renewal limits need period 1"
            )
        span = support[-1]
        pmf = np.zeros(span + 1)
        pmf[1:] = p[:span]
        object.__setattr__(self, "pmf", pmf)

    @property
    def span(self) -> int:
        """Largest support point L."""
        return self.pmf.size - 1

    def mean(self) -> float:
        return float(np.arange(self.pmf.size) @ self.pmf)

    def tail(self, n: int) -> float:
        """P{increment > n} for n >= 0."""
        if n < 0:
            raise ValidationError("tail index must be >= 0")
        return max(0.0, 1.0 - float(self.pmf[: n + 1].sum()))

    def mgf(self, r: float) -> float:
        """E[r^increment] = sum_k p(k) r^k, finite for every r > 0 here."""
        if r <= 0:
            raise RateRangeError(f"rate must be positive, got {r}")
        return float(self.pmf @ np.power(r, np.arange(self.pmf.size)))


def renewal_sequence(inc: IncrementDistribution, horizon: int) -> np.ndarray:
    """u(0..horizon) by the renewal recursion."""
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    u = np.zeros(horizon + 1)
    u[0] = 1.0
    span = inc.span
    for n in range(1, horizon + 1):
        k = min(n, span)
        u[n] = float(inc.pmf[1 : k + 1] @ u[n - 1 :: -1][:k])
    return u


def renewal_sequence_from_pmf(pmf, horizon: int) -> np.ndarray:
    """u(0..horizon) from a raw increment pmf indexed by time.

    Accepts defective (truncated) pmfs: u(n) only touches masses up to n,
    so a pmf truncated at the horizon gives the exact sequence there.
    ``pmf[0]`` is ignored.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    p = np.asarray(pmf, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("increment pmf must be a nonempty vector")
    if np.any(p < 0):
        raise ValidationError("increment masses must be >= 0")
    u = np.zeros(horizon + 1)
    u[0] = 1.0
    for n in range(1, horizon + 1):
        k = min(n, p.size - 1)
        u[n] = float(p[1 : k + 1] @ u[n - 1 :: -1][:k])
    return u


def stationary_delay(inc: IncrementDistribution, horizon: int) -> np.ndarray:
    """e(0..horizon) with e(n) = P{increment > n} / mean.

    The delay law that makes the delayed renewal sequence constant.  Its
    support is {0..L-1}, so entries beyond the span are exactly 0.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    m = inc.mean()
    e = np.zeros(horizon + 1)
    for n in range(min(horizon, inc.span - 1) + 1):
        e[n] = inc.tail(n) / m
    return e


def delayed_renewal(inc: IncrementDistribution, delay, horizon: int) -> np.ndarray:
    """v(0..horizon) for a delayed renewal process: v = delay * u.

    ``delay[k]`` is the probability the first renewal happens at time k
    (k >= 0).  Must be a probability vector within 1e-12.
    """
    d = np.asarray(delay, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValidationError("delay law must be a nonempty vector")
    if np.any(d < 0):
        raise ValidationError("delay masses must be >= 0")
    if abs(float(d.sum()) - 1.0) > _MASS_TOL:
        raise ValidationError(f"delay masses sum to {float(d.sum())!r}")
    u = renewal_sequence(inc, horizon)
    v = np.zeros(horizon + 1)
    for n in range(horizon + 1):
        k = min(n, d.size - 1)
        v[n] = float(d[: k + 1] @ u[n - k : n + 1][::-1])
    return v


def long_run_rate(inc: IncrementDistribution) -> float:
    """The limit of u(n): one renewal per mean increment."""
    return 1.0 / inc.mean()


def kendall_gap_profile(inc: IncrementDistribution, horizon: int) -> np.ndarray:
    """|u(n) - long_run_rate| for n = 0..horizon."""
    return np.abs(renewal_sequence(inc, horizon) - long_run_rate(inc))
