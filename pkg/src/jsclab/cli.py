"""Command line front end.

Every subcommand reads one scenario file, computes, and writes
delimited text under --out. Output files are deterministic: floats are
printed with 17 significant digits, rows are emitted in a fixed order,
and the first line of every CSV names the scenario and the sha256 of
its canonical JSON form, so identical invocations produce identical
bytes.

Exit codes: 0 on success, 1 when a computation exceeds its budget,
2 for a malformed or insufficient scenario (and for bad usage).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from typing import Optional, Sequence

from .analysis import (
    ConditionTrace,
    check_converse,
    check_direct,
    check_domination,
    check_eps,
    check_product_domination,
    check_strict_domination,
    converse_property_diagnostics,
    rate_functionals,
    separation_verdict,
)
from .bounds import GammaSchedule, feinstein_bound, separation_bound, verdu_han_bound
from .coding import brute_force_optimal_error, exact_error, serialize_code, two_step_code
from .models import (
    DEFAULT_BUDGET,
    BudgetError,
    EncoderInput,
    IidInput,
    entropy_spectrum,
    information_spectrum,
    joint_density_spectrum,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .spectra import DEFAULT_TAIL_EPS, Spectrum

PROG = "jsclab"


# ---------------------------------------------------------------------------
# deterministic CSV output


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _write_csv(path: str, scn: Scenario, header: Sequence[str], rows) -> str:
    # input labels may carry commas, so quoting is left to the csv module
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# scenario {scn.name} sha256 {scn.digest}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# flag plumbing


def _parse_gamma_flag(text: str) -> GammaSchedule:
    kind, sep, rest = text.partition(":")
    try:
        if not sep:
            return GammaSchedule.constant(float(text))
        if kind == "constant":
            return GammaSchedule.constant(float(rest))
        if kind == "power":
            parts = rest.split(",")
            if len(parts) != 2:
                raise ValueError("power takes two parameters, c and p")
            return GammaSchedule.power(c=float(parts[0]), p=float(parts[1]))
    except ValueError as e:
        raise ScenarioError(f"--gamma {text!r}: {e}") from e
    raise ScenarioError(f"--gamma {text!r}: expected NUMBER, constant:NUMBER or power:C,P")


def _effective_gamma(scn: Scenario, args) -> GammaSchedule:
    if args.gamma is not None:
        return _parse_gamma_flag(args.gamma)
    if scn.gamma is not None:
        return scn.gamma
    raise ScenarioError("no slack schedule: add a gamma section or pass --gamma")


def _effective_budget(scn: Scenario, args) -> int:
    if args.budget is not None:
        return args.budget
    return scn.budget if scn.budget is not None else DEFAULT_BUDGET


def _effective_eps(scn: Scenario, args, default: float) -> float:
    if args.eps is not None:
        return args.eps
    return scn.eps if scn.eps is not None else default


def _effective_seed(scn: Scenario, args) -> int:
    if args.seed is not None:
        return args.seed
    return scn.seed if scn.seed is not None else 0


def _single_n(scn: Scenario, args) -> int:
    if args.n is not None:
        return args.n
    raise ScenarioError("this command needs a blocklength: pass --n")


def _grid(scn: Scenario, args) -> tuple[int, ...]:
    if scn.n_grid is not None:
        return scn.n_grid
    if args.n is not None:
        return (args.n,)
    raise ScenarioError("no blocklengths: add an n_grid section or pass --n")


# ---------------------------------------------------------------------------
# subcommands


def _spectrum_rows(spec: Spectrum, statistic: str, n: int):
    for v, m in zip(spec.values, spec.masses):
        yield (statistic, n, float(v), float(m))
    if spec.pos_inf_mass > 0.0:
        yield (statistic, n, math.inf, spec.pos_inf_mass)


def cmd_spectrum(args) -> int:
    scn = load_scenario(args.scenario)
    n = _single_n(scn, args)
    budget = _effective_budget(scn, args)
    rows = []
    if scn.source is not None:
        rows.extend(_spectrum_rows(entropy_spectrum(scn.source, n, budget), "entropy", n))
    if scn.channel is not None and isinstance(scn.designated_input, IidInput):
        spec = information_spectrum(scn.channel, scn.designated_input, n, budget)
        rows.extend(_spectrum_rows(spec, "density", n))
    if not rows:
        raise ScenarioError("nothing to compute: add a source, or a channel with an iid input")
    path = _write_csv(_out_path(args, "spectrum.csv"), scn,
                      ("statistic", "n", "value", "mass"), rows)
    print(f"wrote {path}")
    return 0


def cmd_bounds(args) -> int:
    scn = load_scenario(args.scenario)
    src = scn.require("source")
    ch = scn.require("channel")
    inp = scn.require("designated_input")
    schedule = _effective_gamma(scn, args)
    grid = _grid(scn, args)
    budget = _effective_budget(scn, args)
    rows = []
    for i, n in enumerate(grid):
        g = schedule.at(n, i)
        joint = joint_density_spectrum(src, inp, ch, n, budget)
        reports = [verdu_han_bound(joint, g)]
        if isinstance(inp, IidInput):
            reports.insert(0, feinstein_bound(joint, g))
            if scn.c_schedule is not None:
                reports.append(separation_bound(src, ch, inp, scn.c_schedule(n), g, n, budget))
        for r in reports:
            rows.append((r.kind, r.n, r.gamma, r.spectral_term,
                         r.exponential_term, r.bound_value))
    path = _write_csv(_out_path(args, "bounds.csv"), scn,
                      ("kind", "n", "gamma", "spectral_term",
                       "exponential_term", "bound_value"), rows)
    print(f"wrote {path}")
    return 0


def cmd_code(args) -> int:
    scn = load_scenario(args.scenario)
    src = scn.require("source")
    ch = scn.require("channel")
    inp = scn.require("designated_input")
    if not isinstance(inp, IidInput):
        raise ScenarioError("two-step construction draws codewords from an iid input")
    c_schedule = scn.require("c_schedule")
    schedule = _effective_gamma(scn, args)
    n = _single_n(scn, args)
    budget = _effective_budget(scn, args)
    seed = _effective_seed(scn, args)
    c = c_schedule(n)
    g = schedule.at(n)
    code, report = two_step_code(src, ch, inp, c, g, n, budget, seed=seed)
    bound = separation_bound(src, ch, inp, c, g, n, budget)

    code_path = _out_path(args, "code.txt")
    with open(code_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_code(code))
    csv_path = _write_csv(
        _out_path(args, "code.csv"), scn,
        ("n", "rate_c", "gamma", "average_error", "max_error", "separation_bound"),
        [(n, c, g, report.average_error, report.max_error, bound.bound_value)],
    )
    print(f"wrote {code_path}")
    print(f"wrote {csv_path}")
    return 0


def cmd_oracle(args) -> int:
    scn = load_scenario(args.scenario)
    src = scn.require("source")
    ch = scn.require("channel")
    n = _single_n(scn, args)
    budget = _effective_budget(scn, args)
    err, code = brute_force_optimal_error(src, ch, n, budget)

    code_path = _out_path(args, "oracle_code.txt")
    with open(code_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_code(code))
    report = exact_error(code, src, ch, budget)
    rows = [(n, err.average_error, err.max_error, report.average_error)]
    csv_path = _write_csv(_out_path(args, "oracle.csv"), scn,
                          ("n", "average_error", "max_error", "recheck_error"), rows)
    print(f"wrote {code_path}")
    print(f"wrote {csv_path}")
    return 0


def _run_checks(scn: Scenario, args) -> list[ConditionTrace]:
    src = scn.require("source")
    ch = scn.require("channel")
    inp = scn.require("designated_input")
    schedule = _effective_gamma(scn, args)
    grid = _grid(scn, args)
    if len(grid) < 2:
        raise ScenarioError("condition checks need an n_grid with at least 2 points")
    budget = _effective_budget(scn, args)
    eps = _effective_eps(scn, args, 0.0)
    threads = args.threads
    traces = []
    if isinstance(inp, EncoderInput):
        if eps > 0.0:
            traces.append(check_eps(src, inp, ch, schedule, grid, eps, budget, threads))
        else:
            traces.append(check_converse(src, inp, ch, schedule, grid, budget, threads))
    else:
        if eps > 0.0:
            traces.append(check_eps(src, inp, ch, schedule, grid, eps, budget, threads))
        else:
            traces.append(check_direct(src, inp, ch, schedule, grid, budget, threads))
        if scn.c_schedule is not None:
            traces.append(check_strict_domination(
                src, inp, ch, scn.c_schedule, schedule, grid, budget, threads))
            traces.append(check_domination(
                src, inp, ch, scn.c_schedule, schedule, grid, budget, threads))
            traces.append(check_product_domination(
                src, inp, ch, scn.c_schedule, schedule, grid, scn.c_schedule,
                budget, threads))
    return traces


def _trace_rows(traces: Sequence[ConditionTrace]):
    for t in traces:
        for i, n in enumerate(t.n_grid):
            for name in t.term_names:
                yield (t.condition, n, t.gammas[i], name, t.series(name)[i])


def _verdict_rows(traces: Sequence[ConditionTrace]):
    for t in traces:
        yield (t.condition, t.verdict, t.eps, t.deciding_series[-1], ";".join(t.flags))


def cmd_check(args) -> int:
    scn = load_scenario(args.scenario)
    traces = _run_checks(scn, args)
    terms = _write_csv(_out_path(args, "check.csv"), scn,
                       ("condition", "n", "gamma", "term", "value"),
                       _trace_rows(traces))
    verdicts = _write_csv(_out_path(args, "check_verdicts.csv"), scn,
                          ("condition", "verdict", "eps", "final_term", "flags"),
                          _verdict_rows(traces))
    for t in traces:
        print(f"{t.condition}: {t.verdict} (final term {t.deciding_series[-1]:.3g})")
    print(f"wrote {terms}")
    print(f"wrote {verdicts}")
    return 0


def _rate_rows(reports):
    for r in reports:
        est = r.estimate
        for n, thr in zip(est.n_grid, est.per_n_threshold):
            yield (r.quantity, r.input_label, n, thr, est.estimate, est.converged)


def cmd_rates(args) -> int:
    scn = load_scenario(args.scenario)
    grid = _grid(scn, args)
    budget = _effective_budget(scn, args)
    eps = _effective_eps(scn, args, DEFAULT_TAIL_EPS)
    candidates = scn.candidate_inputs
    if not candidates and isinstance(scn.designated_input, IidInput):
        candidates = (scn.designated_input,)
    if scn.source is None and (scn.channel is None or not candidates):
        raise ScenarioError("rates need a source, or a channel with candidate inputs")
    reports = rate_functionals(
        grid, eps,
        src=scn.source,
        ch=scn.channel if candidates else None,
        candidate_inputs=candidates, budget=budget,
    )
    path = _write_csv(_out_path(args, "rates.csv"), scn,
                      ("quantity", "input_label", "n", "per_n_threshold",
                       "estimate", "converged"),
                      _rate_rows(reports))
    for r in reports:
        if not r.input_label:
            print(f"{r.quantity} = {r.value:.6g} (converged: {r.estimate.converged})")
    print(f"wrote {path}")
    return 0


def _diag_rows(diag):
    yield (diag.kind, "strong_gap", "", diag.strong_gap)
    yield (diag.kind, "strong_pass", "", diag.strong_pass)
    yield (diag.kind, "semi_strong_gap", "", diag.semi_strong_gap)
    yield (diag.kind, "semi_strong_pass", "", diag.semi_strong_pass)
    yield (diag.kind, "stability_trending_to_zero", "", diag.stability_trending_to_zero)
    for d, series in zip(diag.stability_deltas, diag.stability_terms):
        for n, v in zip(diag.n_grid, series):
            yield (diag.kind, f"stability_delta_{d:g}", n, v)


def cmd_report(args) -> int:
    from . import plots

    scn = load_scenario(args.scenario)
    src = scn.require("source")
    ch = scn.require("channel")
    inp = scn.require("designated_input")
    grid = _grid(scn, args)
    schedule = _effective_gamma(scn, args)
    budget = _effective_budget(scn, args)
    eps = _effective_eps(scn, args, DEFAULT_TAIL_EPS)
    seed = _effective_seed(scn, args)
    written: list[str] = []

    def emit_csv(name, header, rows):
        written.append(_write_csv(_out_path(args, name), scn, header, rows))

    # spectra at the final grid point
    n_last = grid[-1]
    spectra, labels = [entropy_spectrum(src, n_last, budget)], ["entropy"]
    rows = list(_spectrum_rows(spectra[0], "entropy", n_last))
    if isinstance(inp, IidInput):
        spectra.append(information_spectrum(ch, inp, n_last, budget))
        labels.append("density")
        rows.extend(_spectrum_rows(spectra[1], "density", n_last))
    emit_csv("report_spectra.csv", ("statistic", "n", "value", "mass"), rows)
    written.append(plots.plot_spectra(spectra, labels, _out_path(args, "fig_spectra.png"),
                                      title=f"spectra at n = {n_last}"))

    # condition traces
    traces = _run_checks(scn, args)
    emit_csv("report_check.csv", ("condition", "n", "gamma", "term", "value"),
             _trace_rows(traces))
    emit_csv("report_verdicts.csv", ("condition", "verdict", "eps", "final_term", "flags"),
             _verdict_rows(traces))
    for t in traces:
        slug = "".join(c if c.isalnum() else "_" for c in t.condition)
        written.append(plots.plot_trace(t, _out_path(args, f"fig_check_{slug}.png")))

    # bounds along the grid
    bound_reports = []
    for i, n in enumerate(grid):
        g = schedule.at(n, i)
        joint = joint_density_spectrum(src, inp, ch, n, budget)
        bound_reports.append(verdu_han_bound(joint, g))
        if isinstance(inp, IidInput):
            bound_reports.append(feinstein_bound(joint, g))
    emit_csv("report_bounds.csv",
             ("kind", "n", "gamma", "spectral_term", "exponential_term", "bound_value"),
             [(r.kind, r.n, r.gamma, r.spectral_term, r.exponential_term, r.bound_value)
              for r in bound_reports])

    # rates, diagnostics and the separation comparison
    candidates = scn.candidate_inputs
    if not candidates and isinstance(inp, IidInput):
        candidates = (inp,)
    sep = None
    if len(grid) >= 3 and candidates:
        reports = rate_functionals(grid, eps, src=src, ch=ch,
                                   candidate_inputs=candidates, budget=budget)
        emit_csv("report_rates.csv",
                 ("quantity", "input_label", "n", "per_n_threshold", "estimate", "converged"),
                 _rate_rows(reports))
        written.append(plots.plot_rate_thresholds(
            reports, _out_path(args, "fig_rates.png")))

        diag_rows = list(_diag_rows(converse_property_diagnostics(
            grid, src=src, eps=eps, budget=budget)))
        if isinstance(inp, IidInput):
            diag_rows.extend(_diag_rows(converse_property_diagnostics(
                grid, ch=ch, inp=inp, eps=eps, budget=budget)))
        emit_csv("report_diagnostics.csv", ("kind", "metric", "n", "value"), diag_rows)

        sep = separation_verdict(src, ch, candidates, grid, eps,
                                 budget=budget, seed=seed)
        sep_rows = [
            ("Rf", "", sep.rf),
            ("underline_Rf", "", sep.underline_rf),
            ("C_lower", "", sep.c_lower),
            ("overline_C_lower", "", sep.overline_c_lower),
            ("separable_on_grid", "", sep.separable_on_grid),
            ("rate_margin", "", sep.rate_margin),
            ("necessary_pessimistic_ok", "", sep.necessary_pessimistic_ok),
            ("necessary_pessimistic_margin", "", sep.necessary_pessimistic_margin),
            ("necessary_optimistic_ok", "", sep.necessary_optimistic_ok),
            ("necessary_optimistic_margin", "", sep.necessary_optimistic_margin),
            ("witness_rate_c", "", sep.witness_rate_c),
        ]
        for n, err, bnd in sep.witness:
            sep_rows.append(("witness_error", n, err))
            sep_rows.append(("witness_bound", n, bnd))
        emit_csv("report_separation.csv", ("quantity", "n", "value"), sep_rows)

    witness_errors = [(n, e) for n, e, _ in sep.witness] if sep else None
    written.append(plots.plot_bounds(bound_reports, _out_path(args, "fig_bounds.png"),
                                     errors=witness_errors))

    manifest = {
        "scenario": scn.name,
        "sha256": scn.digest,
        "files": {},
    }
    for path in sorted(written):
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        manifest["files"][os.path.basename(path)] = digest
    manifest_path = _out_path(args, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")

    for path in written + [manifest_path]:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="finite-blocklength information-spectrum laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "spectrum": (cmd_spectrum, "exact entropy / information-density spectra at one n"),
        "bounds": (cmd_bounds, "finite-n achievability and converse bounds"),
        "code": (cmd_code, "build a two-step code and evaluate its exact error"),
        "oracle": (cmd_oracle, "exhaustive optimal joint code at a small blocklength"),
        "check": (cmd_check, "trace transmissibility conditions over a grid"),
        "rates": (cmd_rates, "spectral rate functionals on a grid"),
        "report": (cmd_report, "full pipeline: CSV tables plus rendered figures"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--n", type=int, default=None, help="single blocklength override")
        p.add_argument("--gamma", default=None,
                       help="slack override: NUMBER, constant:NUMBER or power:C,P")
        p.add_argument("--eps", type=float, default=None,
                       help="tail level (rates) or condition level (check)")
        p.add_argument("--budget", type=int, default=None,
                       help="work cap on exact enumeration")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for grid evaluation")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for codebook sampling")
        p.set_defaults(func=fn)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"{PROG}: scenario error: {e}", file=sys.stderr)
        return 2
    except BudgetError as e:
        print(f"{PROG}: budget exceeded: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
