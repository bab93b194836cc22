"""Split-chain construction: turning a minorized set into a regeneration atom.

A minorization P(x, .) >= delta mu(.) on a set U lets each visit to U flip
a coin and, on success, forget the past by drawing from mu.  The split
chain makes the coin explicit: every base state x gets a level-0 copy, and
states of U also get a level-1 copy that acts as the regeneration atom.
The construction here splits with probability delta / 2 rather than delta,
which keeps the atom reachable from inside U in one step with probability
exactly delta / 2 and leaves room for the drift constants to survive the
lift.  States are labelled (x, 0) and (x, 1), interleaved so each level-1
copy follows its base state.

All the claimed identities are checkable exactly on finite chains:
marginal laws collapse to the base chain, level-1 rows all equal the split
of mu, returns to the atom drive an honest renewal sequence, and the
stationary law factors over regeneration cycles.  regenerative_check and
invariant_identities do those comparisons; they are the ground truth the
harris pipeline's arithmetic is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    FiniteChain,
    WeightFunction,
    hitting_law,
    hitting_mgf_all,
    mean_hitting_time_all,
    stationary,
    taboo_kernel,
    taboo_spectral_radius,
)
from .errors import NegativeRowError, ValidationError

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class MinorizationCertificate:
    """P(x, .) >= delta * measure(.) for every x in small_set.

    The measure is a probability vector over the base states, supported
    inside the small set; support outside would break the exact atom
    identities the split relies on.
    """

    delta: float
    small_set: tuple
    measure: np.ndarray = field(repr=False)

    def __init__(self, delta, small_set, measure):
        if not 0.0 < delta <= 1.0:
            raise ValidationError(f"minorization mass must be in (0, 1], got {delta}")
        if len(small_set) == 0:
            raise ValidationError("minorized set must be nonempty")
        m = np.asarray(measure, dtype=float)
        if m.ndim != 1 or np.any(m < 0):
            raise ValidationError("minorization measure must be a nonnegative vector")
        if abs(float(m.sum()) - 1.0) > _MASS_TOL:
            raise ValidationError(f"minorization measure sums to {float(m.sum())!r}")
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "small_set", tuple(small_set))
        object.__setattr__(self, "measure", m)


@dataclass(frozen=True)
class MinorizationReport:
    ok: bool
    worst_slack: float


def verify_minorization(chain: FiniteChain, cert: MinorizationCertificate) -> MinorizationReport:
    """Pointwise check of P(x, .) - delta * measure(.) over the set."""
    if cert.measure.shape[0] != chain.n_states:
        raise ValidationError("measure length does not match the chain")
    idx = chain.indices(cert.small_set)
    in_set = np.zeros(chain.n_states, dtype=bool)
    in_set[idx] = True
    if float(cert.measure[~in_set].sum()) > _MASS_TOL:
        raise ValidationError("measure must be supported inside the minorized set")
    slack = chain.matrix[idx] - cert.delta * cert.measure
    return MinorizationReport(ok=bool(slack.min() >= -_MASS_TOL), worst_slack=float(slack.min()))


def fit_minorization(chain: FiniteChain, small_set) -> MinorizationCertificate:
    """Largest delta with a measure supported on the set: pointwise row minima."""
    idx = chain.indices(small_set)
    floor = chain.matrix[idx].min(axis=0)
    nu = np.zeros(chain.n_states)
    nu[idx] = floor[idx]
    delta = float(nu.sum())
    if delta <= 0.0:
        raise ValidationError("rows share no mass on the set; no minorization exists")
    return MinorizationCertificate(delta=delta, small_set=small_set, measure=nu / delta)


@dataclass(frozen=True)
class SplitChain:
    """The enlarged chain, its atom, and the split of the minorization measure."""

    chain: FiniteChain
    base: FiniteChain
    cert: MinorizationCertificate
    atom: tuple
    measure_split: np.ndarray = field(repr=False)

    @property
    def atom_indices(self) -> np.ndarray:
        return self.chain.indices(self.atom)


def _split_states(base: FiniteChain, cert: MinorizationCertificate):
    in_set = set(cert.small_set)
    states = []
    for x in base.states:
        states.append((x, 0))
        if x in in_set:
            states.append((x, 1))
    return states


def split_measure(base: FiniteChain, cert: MinorizationCertificate, measure) -> np.ndarray:
    """Lift a base measure to the split space.

    Mass on a set state y splits (1 - delta/2, delta/2) between its two
    copies; mass elsewhere stays on the level-0 copy.  Collapsing levels
    recovers the original measure exactly.
    """
    m = np.asarray(measure, dtype=float)
    if m.shape[0] != base.n_states:
        raise ValidationError("measure length does not match the base chain")
    half = 0.5 * cert.delta
    in_set = set(cert.small_set)
    out = []
    for i, x in enumerate(base.states):
        if x in in_set:
            out.append((1.0 - half) * m[i])
            out.append(half * m[i])
        else:
            out.append(m[i])
    return np.asarray(out)


def collapse_measure(split: SplitChain, vec) -> np.ndarray:
    """Sum the two levels back onto the base states."""
    v = np.asarray(vec, dtype=float)
    if v.shape[0] != split.chain.n_states:
        raise ValidationError("vector length does not match the split chain")
    out = np.zeros(split.base.n_states)
    for j, (x, _level) in enumerate(split.chain.states):
        out[split.base.index(x)] += v[j]
    return out


def split_weights(split: SplitChain, weights: WeightFunction) -> WeightFunction:
    """Copy a base weight to both copies of each state."""
    v = weights.values
    if v.shape[0] != split.base.n_states:
        raise ValidationError("weight length does not match the base chain")
    return WeightFunction([v[split.base.index(x)] for x, _level in split.chain.states])


def split_target(split: SplitChain, base_states) -> tuple:
    """All copies of the given base states, for hitting-time comparisons."""
    wanted = set(base_states)
    return tuple(s for s in split.chain.states if s[0] in wanted)


def split_chain(base: FiniteChain, cert: MinorizationCertificate) -> SplitChain:
    """Build the enlarged kernel.

    Level-0 rows off the set are the split of the base row.  Level-0 rows
    on the set condition on the regeneration coin failing, which is where
    the subtraction (2 row* - delta mu*) / (2 - delta) can graze zero;
    entries within 1e-12 below zero are rounding and get clamped, anything
    worse means the minorization certificate is false.  Every level-1 row
    is the split of mu: the atom.
    """
    report = verify_minorization(base, cert)
    if not report.ok:
        raise NegativeRowError(
            "minorization fails on the base chain", worst_slack=report.worst_slack
        )
    states = _split_states(base, cert)
    mu_split = split_measure(base, cert, cert.measure)
    delta = cert.delta
    in_set = set(cert.small_set)
    rows = []
    for x, level in states:
        if level == 1:
            rows.append(mu_split.copy())
            continue
        row = split_measure(base, cert, base.matrix[base.index(x)])
        if x in in_set:
            row = (2.0 * row - delta * mu_split) / (2.0 - delta)
            low = float(row.min())
            if low < -_MASS_TOL:
                raise NegativeRowError(
                    "conditioned split row has a negative entry",
                    state=(x, level),
                    entry=low,
                )
            if low < 0.0:
                row = np.clip(row, 0.0, None)
                row /= row.sum()
        rows.append(row)
    atom = tuple((x, 1) for x in base.states if x in in_set)
    return SplitChain(
        chain=FiniteChain(np.vstack(rows), states=states),
        base=base,
        cert=cert,
        atom=atom,
        measure_split=mu_split,
    )


def atom_access_bound(delta: float) -> float:
    """Guaranteed one-step mass on the atom from level-0 set states."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"minorization mass must be in (0, 1], got {delta}")
    return delta * delta / (2.0 * (2.0 - delta))


def atom_increment(split: SplitChain, horizon: int):
    """Return-time law of the atom: the increment driving the regeneration renewal.

    Returns a HittingLaw; probs[n] is the mass of first return at n, and
    tail() the censored remainder.  The one-step mass is delta / 2 exactly
    by construction.
    """
    law = hitting_law(split.chain, split.atom[0], split.atom, horizon)
    if horizon >= 1:
        got = float(law.probs[1])
        want = 0.5 * split.cert.delta
        assert abs(got - want) <= 1e-12, (got, want)
    return law


def _mixture_hitting(chain: FiniteChain, init: np.ndarray, target_idx, horizon: int) -> np.ndarray:
    """P{tau_target = n} for n = 0..horizon from an initial distribution.

    Time 0 counts: mass already on the target hits at n = 0.
    """
    probs = np.zeros(horizon + 1)
    alive = init.astype(float).copy()
    on_target = np.zeros(chain.n_states, dtype=bool)
    on_target[target_idx] = True
    probs[0] = float(alive[on_target].sum())
    alive[on_target] = 0.0
    for n in range(1, horizon + 1):
        alive = alive @ chain.matrix
        probs[n] = float(alive[on_target].sum())
        alive[on_target] = 0.0
    return probs


@dataclass(frozen=True)
class RegenerativeReport:
    ok: bool
    worst_residual: float


def regenerative_check(split: SplitChain, horizon: int, tol: float = 1e-10) -> RegenerativeReport:
    """Last-exit decomposition through the atom, checked exactly.

    For every source x, every singleton target c, and every n <= horizon:

        P^n(x, c) = aP^n(x, c)
                  + sum_{j=1}^{n-1} [sum_{k=1}^{j} a_x(k) u(j - k)] aP^{n-j}(alpha, c)

    where a_x is the first-hit law of the atom, u the atom renewal
    sequence, and aP the kernel avoiding the atom strictly before the
    endpoint.  The bracket is the probability the chain sits on the atom at
    time j; the identity partitions paths by their last atom visit.
    """
    chain = split.chain
    n_states = chain.n_states
    alpha = chain.index(split.atom[0])

    taboo = [None] + [taboo_kernel(chain, split.atom, n) for n in range(1, horizon + 1)]
    first_hit = np.zeros((n_states, horizon + 1))
    for i in range(n_states):
        first_hit[i] = hitting_law(chain, chain.states[i], split.atom, horizon).probs

    increments = hitting_law(chain, split.atom[0], split.atom, horizon).probs
    u = np.zeros(horizon + 1)
    u[0] = 1.0
    for n in range(1, horizon + 1):
        u[n] = float(increments[1 : n + 1] @ u[n - 1 :: -1][:n])

    on_atom = np.zeros((n_states, horizon + 1))
    for j in range(1, horizon + 1):
        on_atom[:, j] = first_hit[:, 1 : j + 1] @ u[j - 1 :: -1][:j]

    worst = 0.0
    power = np.eye(n_states)
    for n in range(1, horizon + 1):
        power = power @ chain.matrix
        recon = taboo[n].copy()
        for j in range(1, n):
            recon += np.outer(on_atom[:, j], taboo[n - j][alpha])
        worst = max(worst, float(np.abs(power - recon).max()))
    return RegenerativeReport(ok=bool(worst <= tol), worst_residual=worst)


def _default_test_functions(n: int):
    idx = np.arange(n, dtype=float)
    return [
        np.ones(n),
        idx / max(1.0, n - 1.0),
        np.where(np.arange(n) % 2 == 0, 1.0, -1.0),
        np.sin(idx + 1.0),
        1.0 / (idx + 1.0),
    ]


@dataclass(frozen=True)
class SplitInvariantReport:
    ok: bool
    kac_residual: float
    cycle_series_residual: float
    cycle_series_tail: float
    marginal_residual: float
    collapse_residual: float
    hitting_residual: float
    atom_row_residual: float
    atom_mass_residual: float
    access_slack: float


def invariant_identities(
    split: SplitChain, test_functions=None, horizon: int = 50
) -> SplitInvariantReport:
    """Exhaustive exactness checks of the split construction.

    Verifies, against direct computation on the enlarged chain: the Kac
    identity for the atom; the cycle formula pi(g) = pi(atom) * sum of
    endpoint-inclusive taboo evaluations, with a certified geometric tail;
    stationarity of the collapsed stationary law for the base kernel;
    collapse of n-step marginal laws onto base ones; equality of
    hitting-time laws of set copies from split initials; and the atom's
    one-step structure.
    """
    chain = split.chain
    base = split.base
    delta = split.cert.delta
    atom_idx = split.atom_indices
    alpha_state = split.atom[0]
    alpha = chain.index(alpha_state)

    pi_hat = stationary(chain)
    atom_mass = float(pi_hat[atom_idx].sum())
    mean_return = float(mean_hitting_time_all(chain, split.atom)[alpha])
    kac_residual = abs(atom_mass * mean_return - 1.0)

    r_crit = 1.0 / taboo_spectral_radius(chain, split.atom)
    r = 0.5 * (1.0 + r_crit)
    mgf_alpha = float(hitting_mgf_all(chain, split.atom, r)[alpha])
    if test_functions is None:
        test_functions = _default_test_functions(chain.n_states)
    sup_g = max(float(np.abs(np.asarray(g, dtype=float)).max()) for g in test_functions)
    terms = max(
        horizon,
        int(math.ceil((math.log(max(mgf_alpha * max(sup_g, 1.0), 1.0) / ((r - 1.0) * 1e-12)))
                      / math.log(r))),
    )
    terms = min(terms, 20000)
    tail = sup_g * mgf_alpha / (r ** terms * (r - 1.0))

    series_residual = 0.0
    kernel = taboo_kernel(chain, split.atom, 1)
    row = kernel[alpha].copy()
    sums = np.zeros(chain.n_states)
    keep = np.ones(chain.n_states)
    keep[atom_idx] = 0.0
    for _ in range(terms):
        sums += row
        row = (row * keep) @ chain.matrix
    for g in test_functions:
        g = np.asarray(g, dtype=float)
        direct = float(pi_hat @ g)
        via_cycles = atom_mass * float(sums @ g)
        series_residual = max(series_residual, abs(direct - via_cycles))

    collapsed = collapse_measure(split, pi_hat)
    marginal_residual = float(np.abs(collapsed @ base.matrix - collapsed).max())

    uniform = np.full(base.n_states, 1.0 / base.n_states)
    lifted = split_measure(base, split.cert, uniform)
    collapse_residual = 0.0
    base_law, split_law = uniform.copy(), lifted.copy()
    for _ in range(1, horizon + 1):
        base_law = base_law @ base.matrix
        split_law = split_law @ chain.matrix
        collapse_residual = max(
            collapse_residual, float(np.abs(collapse_measure(split, split_law) - base_law).max())
        )

    set_idx_base = base.indices(split.cert.small_set)
    set_split = split.chain.indices(split_target(split, split.cert.small_set))
    base_hits = _mixture_hitting(base, uniform, set_idx_base, horizon)
    split_hits = _mixture_hitting(chain, lifted, set_split, horizon)
    hitting_residual = float(np.abs(base_hits - split_hits).max())

    atom_rows = chain.matrix[atom_idx]
    atom_row_residual = float(np.abs(atom_rows - split.measure_split).max())
    atom_mass_residual = float(
        np.abs(atom_rows[:, atom_idx].sum(axis=1) - 0.5 * delta).max()
    )
    level0_set = [chain.index((x, 0)) for x in split.cert.small_set]
    access = chain.matrix[level0_set][:, atom_idx].sum(axis=1)
    access_slack = float(access.min() - atom_access_bound(delta))

    ok = (
        kac_residual <= 1e-10
        and series_residual <= max(1e-8, 2.0 * tail)
        and marginal_residual <= 1e-10
        and collapse_residual <= 1e-11
        and hitting_residual <= 1e-11
        and atom_row_residual <= 1e-12
        and atom_mass_residual <= 1e-12
        and access_slack >= -1e-12
    )
    return SplitInvariantReport(
        ok=bool(ok),
        kac_residual=kac_residual,
        cycle_series_residual=series_residual,
        cycle_series_tail=tail,
        marginal_residual=marginal_residual,
        collapse_residual=collapse_residual,
        hitting_residual=hitting_residual,
        atom_row_residual=atom_row_residual,
        atom_mass_residual=atom_mass_residual,
        access_slack=access_slack,
    )
