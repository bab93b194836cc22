"""Counter-based Monte Carlo checks for coupling times and hitting times.

Randomness comes from a keyed 64-bit finalizer (the SplitMix64 mixing
function) applied to (replication, draw) counters, so every draw is a pure
function of (seed, replication, counter).  Replications are independent
streams, results do not depend on evaluation order, and reruns with the
same seed are bit-identical.

Coupling runs consume two draws per step (one per component of the pair),
hitting runs one per step; a component that merely decrements its counter
still advances the draw counter, which keeps the stream layout fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .chain import FiniteChain
from .errors import ExcessCensoringError, ValidationError
from .renewal import IncrementDistribution

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D9EDDA1CB64B75


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _uniform(seed: int, reps: np.ndarray, counter: int) -> np.ndarray:
    """One double in [0, 1) per replication, at a fixed draw counter."""
    base = _mix(np.array([seed], dtype=np.uint64))
    keys = (reps.astype(np.uint64) << np.uint64(32)) | np.uint64(counter)
    bits = _mix(base ^ _mix(keys))
    return (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53


def stream_uniform(seed: int, rep: int, counter: int) -> float:
    """Scalar view of the draw stream; equals the vectorized path bit for bit."""
    return float(_uniform(seed, np.array([rep]), counter)[0])


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    replications: int = 100_000
    cap: int = 10_000

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")
        if self.replications < 1:
            raise ValidationError("need at least one replication")
        if not 1 <= self.cap < 2**31:
            raise ValidationError("step cap must be in [1, 2^31)")
        if self.replications >= 2**32:
            raise ValidationError("replication count must fit in 32 bits")


@dataclass(frozen=True)
class SimulationSummary:
    """Order-independent summary of one simulated stopping time per replication.

    Censored replications enter the mean at the cap value, so the mean is a
    slight underestimate when censoring occurred; runs with more than 1% of
    replications censored raise instead of returning.
    """

    mean: float
    stderr: float
    replications: int
    censored: int
    cap: int
    counts: np.ndarray = field(repr=False)

    def tail(self, n: int) -> float:
        """Fraction of replications with time > n; exact for n < cap."""
        if n < 0:
            return 1.0
        if n >= self.counts.shape[0] - 1:
            return 0.0
        return float(self.counts[n + 1 :].sum()) / self.replications

    def tail_stderr(self, n: int) -> float:
        p = self.tail(n)
        return float(np.sqrt(p * (1.0 - p) / self.replications))


def _summarize(times: np.ndarray, censored: int, config: SimulationConfig) -> SimulationSummary:
    n = config.replications
    if censored > 0.01 * n:
        raise ExcessCensoringError(
            "too many replications hit the step cap",
            censored=censored,
            replications=n,
            cap=config.cap,
        )
    mean = float(times.mean())
    stderr = float(times.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    counts = np.bincount(times, minlength=config.cap + 1)
    return SimulationSummary(
        mean=mean, stderr=stderr, replications=n, censored=censored, cap=config.cap, counts=counts
    )


def _sample_from_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.shape[0] - 1)


def simulate_coupling_time(
    inc: IncrementDistribution, delay: int, config: SimulationConfig
) -> SimulationSummary:
    """Meeting time of two countdown processes started at (1, delay + 1).

    Each step draws one uniform per component (counters 2n and 2n + 1); a
    component at 1 spends its draw on a fresh increment, a component above
    1 ignores it and decrements.  The time is the first n >= 0 with both
    components at 1, so delay 0 returns zero without consuming any draws.
    """
    if delay < 0:
        raise ValidationError("delay must be >= 0")
    n_reps = config.replications
    times = np.zeros(n_reps, dtype=np.int64)
    if delay == 0:
        return _summarize(times, 0, config)

    cdf = np.cumsum(inc.pmf[1:])
    reps = np.arange(n_reps, dtype=np.uint64)
    a = np.ones(n_reps, dtype=np.int64)
    b = np.full(n_reps, delay + 1, dtype=np.int64)
    active = np.ones(n_reps, dtype=bool)
    for step in range(config.cap):
        met = active & (a == 1) & (b == 1)
        times[met] = step
        active &= ~met
        if not active.any():
            break
        idx = np.flatnonzero(active)
        u_a = _uniform(config.seed, reps[idx], 2 * step)
        u_b = _uniform(config.seed, reps[idx], 2 * step + 1)
        fresh_a = _sample_from_cdf(cdf, u_a) + 1
        fresh_b = _sample_from_cdf(cdf, u_b) + 1
        a[idx] = np.where(a[idx] > 1, a[idx] - 1, fresh_a)
        b[idx] = np.where(b[idx] > 1, b[idx] - 1, fresh_b)
    censored = int(active.sum())
    times[active] = config.cap
    return _summarize(times, censored, config)


def simulate_hitting(
    chain: FiniteChain, source, target, config: SimulationConfig
) -> SimulationSummary:
    """First time n >= 1 the walk from the source lands in the target set."""
    src = chain.index(source)
    target_idx = chain.indices(target)
    in_target = np.zeros(chain.n_states, dtype=bool)
    in_target[target_idx] = True
    cdfs = np.cumsum(chain.matrix, axis=1)

    n_reps = config.replications
    reps = np.arange(n_reps, dtype=np.uint64)
    state = np.full(n_reps, src, dtype=np.int64)
    times = np.zeros(n_reps, dtype=np.int64)
    active = np.ones(n_reps, dtype=bool)
    for step in range(1, config.cap + 1):
        idx = np.flatnonzero(active)
        u = _uniform(config.seed, reps[idx], step - 1)
        rows = cdfs[state[idx]]
        nxt = (rows < u[:, None]).sum(axis=1)
        nxt = np.minimum(nxt, chain.n_states - 1)
        state[idx] = nxt
        hit = in_target[nxt]
        times[idx[hit]] = step
        active[idx[hit]] = False
        if not active.any():
            break
    censored = int(active.sum())
    times[active] = config.cap
    return _summarize(times, censored, config)


def z_score(summary_mean: float, summary_stderr: float, exact: float) -> float:
    if summary_stderr == 0.0:
        return 0.0 if summary_mean == exact else float("inf")
    return (summary_mean - exact) / summary_stderr


def verdict(z: float) -> str:
    """'consistent' within 3 standard errors, 'flagged' to 4, else 'inconsistent'."""
    a = abs(z)
    if a <= 3.0:
        return "consistent"
    if a <= 4.0:
        return "flagged"
    return "inconsistent"
