"""Command-line runner: certified constants, exhaustive checks, simulations.

Subcommands:
    renewal   renewal sequence against the exact coupling tail
    kendall   convergence constants for a renewal increment law
    harris    convergence constants for a chain or a raw hypothesis bundle
    verify    every exact identity and bound check on one chain
    simulate  Monte Carlo coupling or hitting times against exact values

Each run reads one YAML config, writes a summary, usually a CSV table with
columns (n, exact_distance, bound_value, margin) and a PNG figure next to
it, and prints the summary to stdout.  Summary and CSV bytes are identical
across reruns with the same config; figure bytes are not part of that
contract.  Exit status: 0 on success, 1 when a certified bound or a stated
hypothesis fails on the data, 2 for config or usage errors.

ERGO_BOUNDS_THREADS caps BLAS thread pools; it must take effect before
numpy loads, so this module keeps heavyweight imports out of module scope.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _configure_threads() -> None:
    value = os.environ.get("ERGO_BOUNDS_THREADS")
    if value is None or value == "":
        return
    if not value.isdigit() or int(value) < 1:
        print(f"ERGO_BOUNDS_THREADS must be a positive integer, got {value!r}", file=sys.stderr)
        raise SystemExit(2)
    if "numpy" in sys.modules:
        print("ERGO_BOUNDS_THREADS set after numpy import; thread caps may not apply", file=sys.stderr)
    for var in _THREAD_VARS:
        os.environ.setdefault(var, value)


def _linear(log_value: float) -> float:
    if log_value > 709.0:
        return float("inf")
    return math.exp(log_value)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args, name, fields, rows=None, figure=None):
    from .report import (
        render_comparison_figure,
        render_envelope_figure,
        render_histogram_figure,
        write_summary,
        write_table,
    )

    out = _outdir(args)
    text = write_summary(out / f"{name}_summary.txt", fields)
    if rows is not None:
        write_table(out / f"{name}_table.csv", rows)
    if figure is not None:
        kind = figure[0]
        if kind == "comparison":
            _, ns, exact, bound_log10, title = figure
            render_comparison_figure(out / f"{name}_figure.png", ns, exact, bound_log10, title)
        elif kind == "envelope":
            _, ns, bound_log10, title = figure
            render_envelope_figure(out / f"{name}_figure.png", ns, bound_log10, title)
        else:
            _, counts, title = figure
            render_histogram_figure(out / f"{name}_figure.png", counts, title)
    sys.stdout.write(text)


def _run_renewal(args) -> int:
    from .config import load_config, optional_int, parse_increments, reject_unknown
    from .errors import BoundViolationError
    from .kendall import coupling_tail
    from .renewal import long_run_rate, renewal_sequence

    cfg = load_config(args.config)
    reject_unknown(cfg, {"increments", "horizon"})
    inc = parse_increments(cfg)
    horizon = args.horizon if args.horizon is not None else optional_int(cfg, "horizon", 200)
    u = renewal_sequence(inc, horizon)
    rate = long_run_rate(inc)
    tail = coupling_tail(inc, horizon)
    rows = []
    worst = math.inf
    for n in range(horizon + 1):
        exact = abs(float(u[n]) - rate)
        bound = float(tail[n])
        rows.append((n, exact, bound, bound - exact))
        worst = min(worst, bound - exact)
    if worst < -1e-12:
        raise BoundViolationError("coupling tail fails to dominate the gap", worst_margin=worst)
    fields = [
        ("command", "renewal"),
        ("span", inc.span),
        ("mean_increment", inc.mean()),
        ("long_run_rate", rate),
        ("horizon", horizon),
        ("worst_margin", worst),
        ("status", "ok"),
    ]
    figure = ("comparison", list(range(horizon + 1)), [r[1] for r in rows],
              [math.log10(b) if b > 0 else float("nan") for b in (r[2] for r in rows)],
              "renewal gap vs coupling tail")
    _emit(args, "renewal", fields, rows, figure)
    return 0


def _run_kendall(args) -> int:
    from .config import (
        load_config,
        optional_float,
        optional_int,
        parse_increments,
        parse_scalar,
        reject_unknown,
        require,
    )
    from .errors import BoundViolationError
    from .kendall import kendall_constants, kendall_verify
    from .logspace import LogReal, log_of_rate
    from .renewal import long_run_rate, renewal_sequence

    cfg = load_config(args.config)
    reject_unknown(cfg, {"increments", "rate", "eta", "horizon"})
    inc = parse_increments(cfg)
    rate = parse_scalar(require(cfg, "rate"), "rate")
    eta = optional_float(cfg, "eta", None)
    horizon = args.horizon if args.horizon is not None else optional_int(cfg, "horizon", 200)

    beta = float(inc.pmf[1])
    excess = LogReal.from_float(rate - 1.0)
    eta_gap = None if eta is None else LogReal.from_float(1.0 - eta)
    bound = kendall_constants(beta, inc.mgf(rate), excess, eta_gap=eta_gap)
    report = kendall_verify(inc, bound, horizon)

    u = renewal_sequence(inc, horizon)
    pi = long_run_rate(inc)
    log_r2 = log_of_rate(bound.r2_excess).to_float()
    log_coeff = bound.gap_series_bound.log
    rows = []
    for n in range(horizon + 1):
        exact = abs(float(u[n]) - pi)
        blog = log_coeff - n * log_r2
        bval = _linear(blog)
        rows.append((n, exact, bval, bval - exact))
    fields = [
        ("command", "kendall"),
        ("beta", beta),
        ("rate", rate),
        ("eta", 1.0 - float(bound.eta_gap)),
        ("drift_level", bound.drift_level),
        ("rho", 1.0 + float(bound.rho_excess)),
        ("log_rho_excess", bound.rho_excess.log),
        ("r2", 1.0 + float(bound.r2_excess)),
        ("coefficient", float(bound.coefficient)),
        ("log_coefficient", bound.coefficient.log),
        ("gap_series_bound", float(bound.gap_series_bound)),
        ("log_gap_series_bound", bound.gap_series_bound.log),
        ("partial_sum", report.partial_sum),
        ("tail_bound", report.tail_bound),
        ("per_delay_ok", report.per_delay_ok),
        ("horizon", horizon),
    ]
    if args.trace:
        for key, value in sorted(bound.summary().items()):
            fields.append((f"trace_{key}", value))
    if not (report.ok and report.per_delay_ok):
        _emit(args, "kendall", fields + [("status", "bound_violation")], rows)
        raise BoundViolationError(
            "weighted gap series exceeds the certified bound",
            total_log=report.total_log,
            bound_log=report.bound_log,
        )
    fields.append(("status", "ok"))
    figure = ("comparison", [r[0] for r in rows], [r[1] for r in rows],
              [log_coeff / math.log(10) - n * log_r2 / math.log(10) for n in range(horizon + 1)],
              "renewal gap vs certified envelope")
    _emit(args, "kendall", fields, rows, figure)
    return 0


def _inputs_from_mapping(block):
    from .config import parse_scalar, reject_unknown, require
    from .errors import ParseError
    from .harris import HarrisInputs

    if not isinstance(block, dict):
        raise ParseError("field must be a mapping of hypothesis constants", field="inputs")
    reject_unknown(
        block,
        {"lam", "b", "delta", "access_steps", "access_mass", "small_sup", "minorized_sup"},
        "inputs",
    )
    return HarrisInputs(
        lam=parse_scalar(require(block, "lam", "inputs"), "inputs.lam"),
        b=parse_scalar(require(block, "b", "inputs"), "inputs.b"),
        delta=parse_scalar(require(block, "delta", "inputs"), "inputs.delta"),
        access_steps=parse_scalar(require(block, "access_steps", "inputs"), "inputs.access_steps", int),
        access_mass=parse_scalar(require(block, "access_mass", "inputs"), "inputs.access_mass"),
        small_sup=parse_scalar(require(block, "small_sup", "inputs"), "inputs.small_sup"),
        minorized_sup=parse_scalar(require(block, "minorized_sup", "inputs"), "inputs.minorized_sup"),
    )


def _harris_fields(inputs, bound, prefix="") -> list:
    return [
        (prefix + "lam", inputs.lam),
        (prefix + "b", inputs.b),
        (prefix + "delta", inputs.delta),
        (prefix + "access_steps", inputs.access_steps),
        (prefix + "access_mass", float(inputs.access_mass)),
        (prefix + "small_sup", inputs.small_sup),
        (prefix + "minorized_sup", inputs.minorized_sup),
        ("gamma", bound.gamma),
        ("log_rate", bound.log_rate),
        ("log_rate_excess", bound.rate_excess.log),
        ("coefficient", float(bound.coefficient)),
        ("log_coefficient", bound.coefficient.log),
    ]


def _trace_fields(bound) -> list:
    out = []
    for key, value in bound.trace.items():
        out.append((f"trace_log_{key}", value.log))
    return out


def _distance_rows(chain, weights, bound, horizon):
    import numpy as np

    from .chain import stationary, vnorm_profile

    pi = stationary(chain)
    profiles = np.zeros((chain.n_states, horizon + 1))
    for i in range(chain.n_states):
        profiles[i] = vnorm_profile(chain, weights, chain.states[i], horizon, stationary_dist=pi)
        profiles[i] /= weights.values[i]
    sup = profiles[:, 1:].max(axis=0)
    log_coeff = bound.coefficient.log
    log_rate = bound.log_rate
    rows = []
    blog10 = []
    for n in range(1, horizon + 1):
        exact = float(sup[n - 1])
        blog = log_coeff - n * log_rate
        bval = _linear(blog)
        rows.append((n, exact, bval, bval - exact))
        blog10.append(blog / math.log(10))
    return rows, blog10


def _run_harris(args) -> int:
    from .config import (
        load_config,
        optional_int,
        parse_chain,
        parse_state_set,
        parse_weights,
        reject_unknown,
    )
    from .harris import fit_harris_inputs, harris_constants, verify_harris_bound, verify_hypotheses

    from .config import require

    cfg = load_config(args.config)
    if "chain" not in cfg:
        reject_unknown(cfg, {"inputs"})
        inputs = _inputs_from_mapping(require(cfg, "inputs"))
        bound = harris_constants(inputs)
        fields = [("command", "harris"), ("mode", "inputs")] + _harris_fields(inputs, bound)
        if args.trace:
            fields += _trace_fields(bound)
        fields.append(("status", "ok"))
        horizon = args.horizon if args.horizon is not None else 200
        ns = list(range(1, horizon + 1))
        blog10 = [(bound.coefficient.log - n * bound.log_rate) / math.log(10) for n in ns]
        _emit(args, "harris", fields, figure=("envelope", ns, blog10, "certified envelope"))
        return 0

    # chain mode; a claimed `inputs` block is audited instead of fitting
    reject_unknown(cfg, {"chain", "weights", "small_set", "horizon", "inputs"})
    chain = parse_chain(cfg)
    weights = parse_weights(cfg, chain)
    small = parse_state_set(cfg, chain, "small_set")
    horizon = args.horizon if args.horizon is not None else optional_int(cfg, "horizon", 200)
    if "inputs" in cfg:
        from .splitting import fit_minorization

        inputs = _inputs_from_mapping(cfg["inputs"])
        minor = fit_minorization(chain, small)
    else:
        inputs, minor = fit_harris_inputs(chain, weights, small)
    verify_hypotheses(chain, weights, small, minor, inputs)
    bound = harris_constants(inputs)
    report = verify_harris_bound(chain, weights, bound, horizon)
    fields = [("command", "harris"), ("mode", "chain"), ("n_states", chain.n_states)]
    fields += _harris_fields(inputs, bound)
    fields.append(("worst_log_margin", report.worst_log_margin))
    if args.trace:
        fields += _trace_fields(bound)
    fields.append(("status", "ok"))
    rows, blog10 = _distance_rows(chain, weights, bound, horizon)
    figure = ("comparison", [r[0] for r in rows], [r[1] for r in rows], blog10,
              "weighted distance vs certified envelope")
    _emit(args, "harris", fields, rows, figure)
    return 0


def _run_verify(args) -> int:
    from .config import (
        load_config,
        optional_int,
        parse_chain,
        parse_state_set,
        parse_weights,
        reject_unknown,
    )
    from .errors import BoundViolationError
    from .harris import fit_harris_inputs, harris_constants, verify_harris_bound, verify_hypotheses
    from .splitting import invariant_identities, regenerative_check, split_chain, verify_minorization

    cfg = load_config(args.config)
    reject_unknown(cfg, {"chain", "weights", "small_set", "horizon"})
    chain = parse_chain(cfg)
    weights = parse_weights(cfg, chain)
    small = parse_state_set(cfg, chain, "small_set")
    horizon = args.horizon if args.horizon is not None else optional_int(cfg, "horizon", 200)

    inputs, minor = fit_harris_inputs(chain, weights, small)
    hyp = verify_hypotheses(chain, weights, small, minor, inputs)
    bound = harris_constants(inputs)
    dist = verify_harris_bound(chain, weights, bound, horizon)

    split = split_chain(chain, minor)
    inv = invariant_identities(split)
    regen = regenerative_check(split, horizon=20)
    minor_report = verify_minorization(chain, minor)

    fields = [("command", "verify"), ("n_states", chain.n_states)]
    fields += _harris_fields(inputs, bound)
    fields += [
        ("drift_slack", hyp.drift_slack),
        ("minorization_slack", minor_report.worst_slack),
        ("access_infimum", hyp.access_inf),
        ("worst_log_margin", dist.worst_log_margin),
        ("kac_residual", inv.kac_residual),
        ("cycle_series_residual", inv.cycle_series_residual),
        ("marginal_residual", inv.marginal_residual),
        ("collapse_residual", inv.collapse_residual),
        ("hitting_residual", inv.hitting_residual),
        ("atom_row_residual", inv.atom_row_residual),
        ("atom_mass_residual", inv.atom_mass_residual),
        ("regenerative_residual", regen.worst_residual),
        ("invariants_ok", inv.ok),
        ("regenerative_ok", regen.ok),
    ]
    if args.trace:
        fields += _trace_fields(bound)
    if not (inv.ok and regen.ok):
        _emit(args, "verify", fields + [("status", "bound_violation")])
        raise BoundViolationError(
            "split-chain identities exceed tolerance",
            invariants_ok=inv.ok,
            regenerative_ok=regen.ok,
        )
    fields.append(("status", "ok"))
    rows, blog10 = _distance_rows(chain, weights, bound, horizon)
    figure = ("comparison", [r[0] for r in rows], [r[1] for r in rows], blog10,
              "weighted distance vs certified envelope")
    _emit(args, "verify", fields, rows, figure)
    return 0


def _run_simulate(args) -> int:
    from .config import (
        load_config,
        optional_int,
        parse_chain,
        parse_increments,
        parse_scalar,
        parse_state_set,
        reject_unknown,
        require,
    )
    from .errors import ParseError
    from .montecarlo import SimulationConfig, simulate_coupling_time, simulate_hitting, verdict, z_score

    cfg = load_config(args.config)
    mode = require(cfg, "mode")
    seed = args.seed if args.seed is not None else parse_scalar(require(cfg, "seed"), "seed", int)
    reps = optional_int(cfg, "replications", 100_000)
    cap = optional_int(cfg, "cap", 10_000)
    sim_cfg = SimulationConfig(seed=seed, replications=reps, cap=cap)

    if mode == "countdown":
        reject_unknown(cfg, {"mode", "increments", "delay", "seed", "replications", "cap"})
        inc = parse_increments(cfg)
        delay = parse_scalar(require(cfg, "delay"), "delay", int)
        summary = simulate_coupling_time(inc, delay, sim_cfg)
        fields = [
            ("command", "simulate"),
            ("mode", "countdown"),
            ("delay", delay),
            ("seed", seed),
            ("replications", reps),
            ("cap", cap),
            ("mean", summary.mean),
            ("stderr", summary.stderr),
            ("censored", summary.censored),
        ]
        if 0 < delay < inc.span:
            from .chain import mean_hitting_time_all
            from .kendall import bivariate_chain

            pair = bivariate_chain(inc)
            exact = float(mean_hitting_time_all(pair, [(1, 1)])[pair.index((1, delay + 1))])
            z = z_score(summary.mean, summary.stderr, exact)
            fields += [("exact_mean", exact), ("z", z), ("verdict", verdict(z))]
        title = f"coupling time, delay {delay}"
    elif mode == "chain":
        reject_unknown(cfg, {"mode", "chain", "source", "target", "seed", "replications", "cap"})
        chain = parse_chain(cfg)
        source = require(cfg, "source")
        target = parse_state_set(cfg, chain, "target")
        summary = simulate_hitting(chain, source, target, sim_cfg)
        from .chain import mean_hitting_time_all

        exact = float(mean_hitting_time_all(chain, target)[chain.index(source)])
        z = z_score(summary.mean, summary.stderr, exact)
        fields = [
            ("command", "simulate"),
            ("mode", "chain"),
            ("source", source),
            ("seed", seed),
            ("replications", reps),
            ("cap", cap),
            ("mean", summary.mean),
            ("stderr", summary.stderr),
            ("censored", summary.censored),
            ("exact_mean", exact),
            ("z", z),
            ("verdict", verdict(z)),
        ]
        title = "hitting time"
    else:
        raise ParseError(f"mode must be 'countdown' or 'chain', got {mode!r}", field="mode")
    _emit(args, "simulate", fields, figure=("histogram", summary.counts, title))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergobounds",
        description="explicit geometric convergence bounds for Markov chains, with exhaustive checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "renewal": (_run_renewal, "renewal sequence against the exact coupling tail"),
        "kendall": (_run_kendall, "certified constants for a renewal increment law"),
        "harris": (_run_harris, "certified constants for a chain or hypothesis bundle"),
        "verify": (_run_verify, "every exact identity and bound check on one chain"),
        "simulate": (_run_simulate, "Monte Carlo stopping times against exact values"),
    }
    for name, (handler, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=".", help="directory for summary, table, and figure")
        p.add_argument("--seed", type=int, default=None, help="override the config seed (simulate)")
        p.add_argument("--horizon", type=int, default=None, help="override the table horizon")
        p.add_argument("--trace", action="store_true", help="include stage-by-stage constants")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    _configure_threads()
    args = build_parser().parse_args(argv)
    from .errors import BoundViolationError, ErgoBoundsError, HypothesisFailError

    try:
        return args.handler(args)
    except (BoundViolationError, HypothesisFailError) as exc:
        print(f"{exc.code}: {exc} {exc.context}", file=sys.stderr)
        return 1
    except ErgoBoundsError as exc:
        print(f"{exc.code}: {exc} {exc.context}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
