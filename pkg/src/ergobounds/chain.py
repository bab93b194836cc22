"""Finite Markov chains and exact path functionals.

Everything downstream reduces to a handful of linear-algebra primitives on a
row-stochastic matrix: n-step laws, stationary vectors, kernels taboo'd on a
set, first-hitting laws, and rate-weighted additive functionals up to a
hitting time.  Hitting times use the return-time convention throughout:

    tau_A = min{ n >= 1 : X_n in A },

so tau_A >= 1 even when the start state lies in A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DivergentExpectationError,
    NonUniqueStationaryError,
    RateRangeError,
    ValidationError,
)

_ROW_SUM_TOL = 1e-12
_EIGENVALUE_ONE_TOL = 1e-9
_DIVERGENCE_TOL = 1e-9


class FiniteChain:
    """A finite-state Markov chain given by a row-stochastic matrix.

    Args:
        matrix: square array; rows must sum to one within 1e-12 and all
            entries must be nonnegative.
        states: optional hashable labels, one per state.  Defaults to
            0..n-1 so labels and indices coincide.
    """

    def __init__(self, matrix, states: Optional[Sequence] = None):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"transition matrix must be square, got {m.shape}")
        if m.shape[0] == 0:
            raise ValidationError("transition matrix must have at least one state")
        if np.any(m < 0):
            i, j = np.argwhere(m < 0)[0]
            raise ValidationError(
                f"negative transition probability at ({i}, {j}): {m[i, j]}"
            )
        row_sums = m.sum(axis=1)
        bad = np.argwhere(np.abs(row_sums - 1.0) > _ROW_SUM_TOL)
        if bad.size:
            i = int(bad[0][0])
            raise ValidationError(
                f"row {i} sums to {row_sums[i]!r}, outside 1 +/- {_ROW_SUM_TOL}"
            )
        self.matrix = m
        if states is None:
            states = list(range(m.shape[0]))
        else:
            states = list(states)
            if len(states) != m.shape[0]:
                raise ValidationError(
                    f"{len(states)} labels for {m.shape[0]} states"
                )
        self.states = states
        self._index = {s: i for i, s in enumerate(states)}
        if len(self._index) != len(states):
            raise ValidationError("state labels must be distinct")

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def index(self, state) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise ValidationError(f"unknown state {state!r}") from None

    def indices(self, states: Iterable) -> np.ndarray:
        idx = np.array([self.index(s) for s in states], dtype=int)
        if idx.size == 0:
            raise ValidationError("state subset must be nonempty")
        if len(set(idx.tolist())) != idx.size:
            raise ValidationError("state subset contains duplicates")
        return idx

    def __repr__(self) -> str:
        return f"FiniteChain(n_states={self.n_states})"


@dataclass(frozen=True)
class WeightFunction:
    """A state weight V with V >= 1 everywhere."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValidationError("weight values must be a vector")
        if np.any(v < 1.0):
            raise ValidationError(
                f"weights must be >= 1 everywhere, min is {v.min()}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def ones(cls, n: int) -> "WeightFunction":
        return cls(np.ones(n))

    def max_over(self, idx: np.ndarray) -> float:
        return float(self.values[idx].max())


@dataclass(frozen=True)
class HittingLaw:
    """Law of tau_target from one source state, truncated at a horizon.

    ``probs[n]`` is P{tau = n} for n = 1..horizon; ``probs[0]`` is always 0.
    """

    source: int
    target: tuple
    horizon: int
    probs: np.ndarray = field(repr=False)

    def tail(self) -> float:
        """P{tau > horizon}, clipped against rounding."""
        return max(0.0, 1.0 - float(self.probs.sum()))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


def n_step(chain: FiniteChain, n: int) -> np.ndarray:
    """The n-step transition matrix P^n (n >= 0)."""
    if n < 0:
        raise ValidationError("step count must be nonnegative")
    return np.linalg.matrix_power(chain.matrix, n)


def stationary(chain: FiniteChain) -> np.ndarray:
    """The unique stationary distribution.

    Solves the balance equations with one equation replaced by the
    normalization constraint.  Raises NON_UNIQUE when the eigenvalue-1 left
    eigenspace has dimension greater than one (detected with tolerance 1e-9
    on the spectrum).
    """
    p = chain.matrix
    n = chain.n_states
    eigs = np.linalg.eigvals(p)
    near_one = int(np.sum(np.abs(eigs - 1.0) < _EIGENVALUE_ONE_TOL))
    if near_one > 1:
        raise NonUniqueStationaryError(
            f"{near_one} eigenvalues within {_EIGENVALUE_ONE_TOL} of 1",
            eigenvalues=np.sort(np.abs(eigs))[::-1][:near_one].tolist(),
        )
    a = (p.T - np.eye(n)).copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    residual = float(np.max(np.abs(pi @ p - pi)))
    if residual > 1e-12:
        raise ValidationError(
            f"stationary solve residual {residual} exceeds 1e-12"
        )
    return pi


def taboo_kernel(chain: FiniteChain, taboo: Iterable, n: int) -> np.ndarray:
    """The n-step kernel taboo'd on a set B.

    Entry (x, y) is P_x{X_n = y, tau_B >= n}: the chain avoids B at steps
    1..n-1 and is at y at step n (y may lie in B).  n = 1 gives P itself.
    """
    if n < 1:
        raise ValidationError("taboo kernel order must be >= 1")
    idx = chain.indices(taboo)
    keep = np.ones(chain.n_states)
    keep[idx] = 0.0
    t = chain.matrix.copy()
    for _ in range(n - 1):
        t = (t * keep) @ chain.matrix
    return t


def taboo_kernel_sequence(chain: FiniteChain, taboo: Iterable, n: int) -> list:
    """[taboo_kernel(k) for k = 1..n] computed in one sweep."""
    if n < 1:
        raise ValidationError("taboo kernel order must be >= 1")
    idx = chain.indices(taboo)
    keep = np.ones(chain.n_states)
    keep[idx] = 0.0
    out = [chain.matrix.copy()]
    for _ in range(n - 1):
        out.append((out[-1] * keep) @ chain.matrix)
    return out


def hitting_law(chain: FiniteChain, source, target: Iterable, horizon: int) -> HittingLaw:
    """Exact law of the first hitting time of ``target`` from ``source``."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    src = chain.index(source)
    idx = chain.indices(target)
    probs = np.zeros(horizon + 1)
    v = np.zeros(chain.n_states)
    v[src] = 1.0
    for n in range(1, horizon + 1):
        v = v @ chain.matrix
        probs[n] = float(v[idx].sum())
        v[idx] = 0.0
    return HittingLaw(source=src, target=tuple(int(i) for i in idx), horizon=horizon, probs=probs)


def _complement(n: int, idx: np.ndarray) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[idx] = False
    return np.flatnonzero(mask)


def taboo_spectral_radius(chain: FiniteChain, target: Iterable) -> float:
    """Spectral radius of the transition block that avoids ``target``.

    Weighted sums up to tau_target converge at rate r exactly when
    r * (this radius) < 1.
    """
    idx = chain.indices(target)
    off = _complement(chain.n_states, idx)
    if off.size == 0:
        return 0.0
    q = chain.matrix[np.ix_(off, off)]
    return float(np.max(np.abs(np.linalg.eigvals(q))))


def mgf_weighted_sum_all(
    chain: FiniteChain, weights: WeightFunction, target: Iterable, r: float
) -> np.ndarray:
    """E_x[ sum_{k=0}^{tau_target - 1} V(X_k) r^k ] for every source x.

    Solved exactly through the taboo block: with Q the transition block on
    the complement of the target and V_c the weights there,

        h = V_c + r Q h      on the complement,
        E_x = V(x) + r * P(x, complement) . h   for every x.

    Raises DIVERGENT when r Q has spectral radius >= 1 (tolerance 1e-9).
    """
    if r <= 0:
        raise RateRangeError(f"rate must be positive, got {r}")
    if weights.values.shape[0] != chain.n_states:
        raise ValidationError("weight vector length does not match the chain")
    idx = chain.indices(target)
    off = _complement(chain.n_states, idx)
    v = weights.values
    if off.size == 0:
        return v.copy()
    q = chain.matrix[np.ix_(off, off)]
    radius = float(np.max(np.abs(np.linalg.eigvals(q)))) * r
    if radius >= 1.0 - _DIVERGENCE_TOL:
        raise DivergentExpectationError(
            f"scaled taboo block has spectral radius {radius}, too close to 1",
            radius=radius,
            rate=r,
        )
    h = np.linalg.solve(np.eye(off.size) - r * q, v[off])
    return v + r * (chain.matrix[:, off] @ h)


def mgf_weighted_sum(
    chain: FiniteChain, weights: WeightFunction, source, target: Iterable, r: float
) -> float:
    """E_source[ sum_{k=0}^{tau_target - 1} V(X_k) r^k ], exactly."""
    return float(mgf_weighted_sum_all(chain, weights, target, r)[chain.index(source)])


def hitting_mgf_all(chain: FiniteChain, target: Iterable, r: float) -> np.ndarray:
    """E_x[r^tau_target] for every source x.

    Uses the exact identity E[r^tau] = 1 + (r-1) E[sum_{k<tau} r^k] with the
    unit weight, so divergence detection is shared with the weighted sums.
    """
    ones = WeightFunction.ones(chain.n_states)
    return 1.0 + (r - 1.0) * mgf_weighted_sum_all(chain, ones, target, r)


def mean_hitting_time_all(chain: FiniteChain, target: Iterable) -> np.ndarray:
    """E_x[tau_target] for every source x (finite chains: solve, not sum)."""
    idx = chain.indices(target)
    off = _complement(chain.n_states, idx)
    out = np.ones(chain.n_states)
    if off.size == 0:
        return out
    q = chain.matrix[np.ix_(off, off)]
    m = np.linalg.solve(np.eye(off.size) - q, np.ones(off.size))
    return out + chain.matrix[:, off] @ m


def vnorm_distance(
    chain: FiniteChain,
    weights: WeightFunction,
    source,
    n: int,
    stationary_dist: Optional[np.ndarray] = None,
) -> float:
    """The V-weighted total-variation distance sum_y |P^n(x,y) - pi(y)| V(y)."""
    if stationary_dist is None:
        stationary_dist = stationary(chain)
    row = n_step(chain, n)[chain.index(source)]
    return float(np.abs(row - stationary_dist) @ weights.values)


def vnorm_profile(
    chain: FiniteChain,
    weights: WeightFunction,
    source,
    horizon: int,
    stationary_dist: Optional[np.ndarray] = None,
) -> np.ndarray:
    """vnorm_distance at every n = 1..horizon (index 0 unused, set to nan)."""
    if stationary_dist is None:
        stationary_dist = stationary(chain)
    out = np.full(horizon + 1, np.nan)
    row = np.zeros(chain.n_states)
    row[chain.index(source)] = 1.0
    for n in range(1, horizon + 1):
        row = row @ chain.matrix
        out[n] = float(np.abs(row - stationary_dist) @ weights.values)
    return out
