"""Grid diagnostics for transmissibility conditions and rate functionals.

Everything here evaluates exact finite-n probabilities on a blocklength
grid and reports how the sequence behaves on that grid. Verdicts are
deliberately modest: "satisfied-on-grid" states that the terms are
small and still falling at the end of the grid, nothing more. No
function in this module claims an n -> infinity limit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import GammaSchedule, event_mass_a_le_b_plus, gamma_values, separation_bound
from .coding import two_step_code
from .models import (
    DEFAULT_BUDGET,
    ChannelModel,
    EncoderInput,
    IidInput,
    InputModel,
    MixedSource,
    SourceModel,
    UniformMessageSource,
    entropy_spectrum,
    information_spectrum,
    joint_density_spectrum,
)
from .spectra import (
    DEFAULT_TAIL_EPS,
    LimitEstimate,
    Spectrum,
    atom_mass,
    ccdf,
    cdf,
    estimate_plim,
)

VERDICTS = ("satisfied-on-grid", "violated", "inconclusive")

# A final term below eps + ENVELOPE_LEVEL with a nonincreasing tail
# counts as satisfied on the grid.
ENVELOPE_LEVEL = 0.05

# Heuristic pass thresholds for the converse-property diagnostics. The
# strong tolerance must sit above the finite-n estimator wings (about
# 0.09 nats for a skewed binary source at n = 2000 with eps = 1e-3) and
# below any genuine multi-mode gap of interest.
STRONG_GAP_TOL = 0.15
SEMI_STRONG_TOL = 0.01


def _ordered_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Map preserving order; optional thread pool over grid points."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ConditionTrace:
    """Per-n terms of one transmissibility condition on a grid."""

    condition: str
    n_grid: tuple[int, ...]
    gammas: tuple[float, ...]
    term_names: tuple[str, ...]
    per_n_terms: tuple[tuple[float, ...], ...]
    verdict: str
    eps: float
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if len(self.per_n_terms) != len(self.n_grid):
            raise ValueError("per_n_terms must parallel the grid")
        for row in self.per_n_terms:
            if len(row) != len(self.term_names):
                raise ValueError("term rows must parallel term_names")

    def series(self, name: str) -> tuple[float, ...]:
        idx = self.term_names.index(name)
        return tuple(row[idx] for row in self.per_n_terms)

    @property
    def deciding_series(self) -> tuple[float, ...]:
        """The last-named term drives the verdict."""
        return self.series(self.term_names[-1])


def _grid_verdict(series: Sequence[float], eps: float) -> str:
    """Envelope rule on the deciding series.

    Satisfied when the final term is under eps + ENVELOPE_LEVEL and the
    last half of the grid is nonincreasing; violated when the final term
    is at or above that level and the last half is nondecreasing; the
    rest is inconclusive.
    """
    final = series[-1]
    tail = series[len(series) // 2 :]
    noninc = all(b <= a + 1e-9 for a, b in zip(tail, tail[1:]))
    nondec = all(b >= a - 1e-9 for a, b in zip(tail, tail[1:]))
    if final < eps + ENVELOPE_LEVEL and noninc:
        return "satisfied-on-grid"
    if final >= eps + ENVELOPE_LEVEL and nondec:
        return "violated"
    return "inconclusive"


def _checked_grid(n_grid: Sequence[int]) -> tuple[int, ...]:
    grid = tuple(int(n) for n in n_grid)
    if len(grid) < 2:
        raise ValueError("grid diagnostics need at least 2 blocklengths")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    return grid


def check_eps(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    eps: float = 0.0,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Spectral term of the direct (or converse) condition at level eps.

    With an encoder input this evaluates the converse event
    Pr{A <= B - gamma_n} on the coupling the encoder induces; any other
    input evaluates the direct event Pr{A <= B + gamma_n}. eps = 0
    reproduces the plain direct/converse checks.
    """
    if not (0.0 <= eps < 1.0):
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    grid = _checked_grid(n_grid)
    gv = gamma_values(schedule, grid)
    converse = isinstance(inp, EncoderInput)
    sign = -1.0 if converse else 1.0

    def term(pair):
        n, g = pair
        joint = joint_density_spectrum(src, inp, ch, n, budget)
        return event_mass_a_le_b_plus(joint, sign * g)

    terms = _ordered_map(term, list(zip(grid, gv.values)), threads)
    rows = tuple((float(t),) for t in terms)
    name = "converse_term" if converse else "direct_term"
    return ConditionTrace(
        condition=("converse" if converse else "direct") + (f"@eps={eps:g}" if eps else ""),
        n_grid=grid,
        gammas=gv.values,
        term_names=(name,),
        per_n_terms=rows,
        verdict=_grid_verdict([r[0] for r in rows], eps),
        eps=float(eps),
        flags=gv.flags,
    )


def check_direct(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Direct condition: Pr{A <= B + gamma_n} along the grid.

    The input may be unconditional or conditional; it fixes the random
    codebook the direct part would draw.
    """
    if isinstance(inp, EncoderInput):
        raise ValueError("the direct condition takes a codebook law, not a fixed encoder")
    return check_eps(src, inp, ch, schedule, n_grid, 0.0, budget, threads)


def check_converse(
    src: SourceModel,
    inp: EncoderInput,
    ch: ChannelModel,
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Converse condition: Pr{A <= B - gamma_n} under an actual encoder."""
    if not isinstance(inp, EncoderInput):
        raise ValueError("the converse condition needs the encoder-induced coupling")
    return check_eps(src, inp, ch, schedule, n_grid, 0.0, budget, threads)


def _boundary_flags(c: float, b_spec: Spectrum, a_spec: Spectrum, t_channel: float) -> bool:
    return atom_mass(b_spec, c) > 0.0 or atom_mass(a_spec, t_channel) > 0.0


def _domination_trace(
    condition: str,
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    c_schedule: Callable[[int], float],
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    channel_shift: float,
    combine: str,
    budget: int,
    threads: int,
) -> ConditionTrace:
    grid = _checked_grid(n_grid)
    gv = gamma_values(schedule, grid)

    def term(pair):
        n, g = pair
        c_n = float(c_schedule(n))
        b_spec = entropy_spectrum(src, n, budget)
        a_spec = information_spectrum(ch, inp, n, budget)
        t_channel = c_n + channel_shift * g
        src_term = ccdf(b_spec, c_n)
        ch_term = cdf(a_spec, t_channel)
        boundary = _boundary_flags(c_n, b_spec, a_spec, t_channel)
        if combine == "sum":
            total = src_term + ch_term
        else:
            total = src_term * ch_term
        return (c_n, src_term, ch_term, total, boundary)

    results = _ordered_map(term, list(zip(grid, gv.values)), threads)
    total_name = "sum" if combine == "sum" else "product"
    rows = tuple((r[0], r[1], r[2], r[3]) for r in results)
    flags = gv.flags
    if any(r[4] for r in results):
        flags = flags + ("boundary-atom",)
    return ConditionTrace(
        condition=condition,
        n_grid=grid,
        gammas=gv.values,
        term_names=("threshold_c", "term_source", "term_channel", total_name),
        per_n_terms=rows,
        verdict=_grid_verdict([r[3] for r in rows], 0.0),
        eps=0.0,
        flags=flags,
    )


def check_strict_domination(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    c_schedule: Callable[[int], float],
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Strict-domination sum Pr{B >= c_n} + Pr{A <= c_n + gamma_n}.

    Vanishing of this sum for some threshold and input is equivalent to
    the direct condition; boundary atoms sitting exactly on c_n are
    flagged because the inclusive events make the trace sensitive there.
    """
    return _domination_trace(
        "strict-domination", src, inp, ch, c_schedule, schedule, n_grid,
        channel_shift=+1.0, combine="sum", budget=budget, threads=threads,
    )


def check_domination(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    c_schedule: Callable[[int], float],
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Domination sum Pr{B >= c_n} + Pr{A <= c_n - gamma_n}.

    Vanishing for every admissible threshold family is the converse-side
    companion of strict domination; this trace checks one family.
    """
    return _domination_trace(
        "domination", src, inp, ch, c_schedule, schedule, n_grid,
        channel_shift=-1.0, combine="sum", budget=budget, threads=threads,
    )


def check_product_domination(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    d_schedule: Callable[[int], float],
    schedule: GammaSchedule,
    n_grid: Sequence[int],
    sum_c_schedule: Optional[Callable[[int], float]] = None,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConditionTrace:
    """Product form Pr{B >= d_n} * Pr{A <= d_n - gamma_n}.

    When a sum-form threshold family c_n is supplied alongside, the
    one-sided comparison behind "product implies sum" is asserted per
    grid point: with d_n >= c_n the product's source factor is bounded
    by the sum's, with d_n <= c_n the channel factor is, so the product
    never exceeds the sum of the c_n terms. Whether the reverse
    implication holds in general is open; the trace only reports both
    sequences.
    """
    trace = _domination_trace(
        "product-domination", src, inp, ch, d_schedule, schedule, n_grid,
        channel_shift=-1.0, combine="product", budget=budget, threads=threads,
    )
    if sum_c_schedule is None:
        return trace
    companion = check_domination(
        src, inp, ch, sum_c_schedule, schedule, n_grid, budget, threads
    )
    for i, n in enumerate(trace.n_grid):
        d_n = trace.per_n_terms[i][0]
        c_n = companion.per_n_terms[i][0]
        kappa, mu = trace.per_n_terms[i][1], trace.per_n_terms[i][2]
        alpha, beta = companion.per_n_terms[i][1], companion.per_n_terms[i][2]
        if d_n >= c_n and not kappa <= alpha + 1e-12:
            raise AssertionError(
                f"case d_n >= c_n at n = {n}: source factor {kappa} exceeds {alpha}"
            )
        if d_n <= c_n and not mu <= beta + 1e-12:
            raise AssertionError(
                f"case d_n <= c_n at n = {n}: channel factor {mu} exceeds {beta}"
            )
        if kappa * mu > alpha + beta + 1e-12:
            raise AssertionError(f"product exceeds companion sum at n = {n}")
    return trace


# ---------------------------------------------------------------------------
# rate functionals


@dataclass(frozen=True)
class RateReport:
    """One estimated rate functional."""

    quantity: str
    estimate: LimitEstimate
    input_label: str = ""

    @property
    def value(self) -> float:
        return self.estimate.estimate


def _source_spectra(src, grid, budget):
    return [entropy_spectrum(src, n, budget) for n in grid]


def rate_functionals(
    n_grid: Sequence[int],
    eps: float = DEFAULT_TAIL_EPS,
    src: Optional[SourceModel] = None,
    ch: Optional[ChannelModel] = None,
    candidate_inputs: Sequence[IidInput] = (),
    budget: int = DEFAULT_BUDGET,
) -> list[RateReport]:
    """Estimate rate functionals on a grid.

    Source side: the spectral sup-rate (upper tail of the entropy
    spectrum, the pessimistic coding rate) and the spectral inf-rate
    (lower tail, reported as the optimistic-side rate; the two coincide
    exactly when the source has the strong converse property). Channel
    side: per candidate input, the inf- and sup-information rates; the
    capacity estimates take the best candidate, so they are lower bounds
    relative to a full input optimization. Uniform message sources come
    out exactly at (1/n) log M_n by construction.
    """
    grid = _checked_grid(n_grid)
    if len(grid) < 3:
        raise ValueError("rate estimation needs at least 3 grid points")
    reports: list[RateReport] = []
    if src is not None:
        spectra = _source_spectra(src, grid, budget)
        h_bar = estimate_plim(spectra, "p-limsup", eps)
        h_under = estimate_plim(spectra, "p-liminf", eps)
        reports.append(RateReport("H_bar", h_bar))
        reports.append(RateReport("H_underline", h_under))
        reports.append(RateReport("Rf", h_bar))
        reports.append(RateReport("underline_Rf", h_under))
    if ch is not None:
        if not candidate_inputs:
            raise ValueError("channel rate estimation needs candidate inputs")
        best_low: Optional[tuple[float, LimitEstimate, str]] = None
        best_high: Optional[tuple[float, LimitEstimate, str]] = None
        for inp in candidate_inputs:
            spectra = [information_spectrum(ch, inp, n, budget) for n in grid]
            low = estimate_plim(spectra, "p-liminf", eps)
            high = estimate_plim(spectra, "p-limsup", eps)
            reports.append(RateReport("I_underline", low, inp.label))
            reports.append(RateReport("I_overline", high, inp.label))
            if best_low is None or low.estimate > best_low[0]:
                best_low = (low.estimate, low, inp.label)
            if best_high is None or high.estimate > best_high[0]:
                best_high = (high.estimate, high, inp.label)
        reports.append(RateReport("C_lower", best_low[1], best_low[2]))
        reports.append(RateReport("overline_C_lower", best_high[1], best_high[2]))
    return reports


def report_value(reports: Sequence[RateReport], quantity: str) -> float:
    for r in reports:
        if r.quantity == quantity:
            return r.value
    raise KeyError(f"no report for {quantity!r}")


# ---------------------------------------------------------------------------
# converse-property diagnostics


@dataclass(frozen=True)
class DiagnosticsReport:
    """Heuristic strong/semi-strong converse and stability indicators.

    All three checks compare finite-grid estimators, nothing more: the
    strong check is the gap between the upper and lower tail estimates,
    the semi-strong check compares the pessimistic estimate with its
    optimistic (best-over-grid) variant, and the stability terms are the
    exact probabilities that the statistic strays a relative delta from
    its per-n mean.
    """

    kind: str
    strong_gap: float
    strong_pass: bool
    semi_strong_gap: float
    semi_strong_pass: bool
    stability_deltas: tuple[float, ...]
    stability_terms: tuple[tuple[float, ...], ...]
    stability_trending_to_zero: bool
    n_grid: tuple[int, ...]
    eps: float


def converse_property_diagnostics(
    n_grid: Sequence[int],
    src: Optional[SourceModel] = None,
    ch: Optional[ChannelModel] = None,
    inp: Optional[IidInput] = None,
    eps: float = DEFAULT_TAIL_EPS,
    deltas: tuple[float, ...] = (0.1, 0.05),
    strong_tol: float = STRONG_GAP_TOL,
    semi_tol: float = SEMI_STRONG_TOL,
    budget: int = DEFAULT_BUDGET,
) -> DiagnosticsReport:
    """Diagnose converse properties of a source or an (input, channel) pair.

    Pass exactly one of src or (ch and inp). For a channel the stability
    reference mean is the designated input's per-n mutual information
    rate, a stand-in for the input-optimized value, so a failed channel
    stability check with one input is only evidence, not proof.
    """
    if (src is None) == (ch is None):
        raise ValueError("diagnose either a source or a channel, not both")
    grid = _checked_grid(n_grid)
    if src is not None:
        spectra = _source_spectra(src, grid, budget)
        pess_mode, opt_mode = "p-limsup", "optimistic-limsup"
        kind = "source"
    else:
        if inp is None:
            raise ValueError("channel diagnostics need a designated input")
        spectra = [information_spectrum(ch, inp, n, budget) for n in grid]
        pess_mode, opt_mode = "p-liminf", "optimistic-liminf"
        kind = "channel"

    upper = estimate_plim(spectra, "p-limsup", eps)
    lower = estimate_plim(spectra, "p-liminf", eps)
    strong_gap = upper.estimate - lower.estimate

    pess = estimate_plim(spectra, pess_mode, eps)
    opt = estimate_plim(spectra, opt_mode, eps)
    semi_gap = abs(opt.estimate - pess.estimate)

    terms = []
    for s in spectra:
        mean = s.mean()
        row = []
        for d in deltas:
            if not math.isfinite(mean) or mean <= 1e-12:
                row.append(math.nan)
                continue
            lo, hi = mean * (1.0 - d), mean * (1.0 + d)
            inside = cdf(s, hi) - cdf(s, lo) + atom_mass(s, lo)
            row.append(min(max(1.0 - inside, 0.0), 1.0))
        terms.append(tuple(row))
    by_delta = tuple(tuple(t[j] for t in terms) for j in range(len(deltas)))
    trending = all(
        series[-1] == min(series) and series[-1] < 0.5
        for series in by_delta
        if not any(math.isnan(x) for x in series)
    )

    return DiagnosticsReport(
        kind=kind,
        strong_gap=float(strong_gap),
        strong_pass=bool(strong_gap <= strong_tol),
        semi_strong_gap=float(semi_gap),
        semi_strong_pass=bool(semi_gap <= semi_tol),
        stability_deltas=tuple(float(d) for d in deltas),
        stability_terms=by_delta,
        stability_trending_to_zero=bool(trending),
        n_grid=grid,
        eps=float(eps),
    )


# ---------------------------------------------------------------------------
# separation verdict


@dataclass(frozen=True)
class SeparationReport:
    """Rate comparison plus, when the rates allow it, a two-step witness."""

    rf: float
    underline_rf: float
    c_lower: float
    overline_c_lower: float
    separable_on_grid: bool
    rate_margin: float
    necessary_pessimistic_ok: bool
    necessary_pessimistic_margin: float
    necessary_optimistic_ok: bool
    necessary_optimistic_margin: float
    witness: tuple[tuple[int, float, float], ...] = ()  # (n, exact error, bound)
    witness_rate_c: float = math.nan


def separation_verdict(
    src: SourceModel,
    ch: ChannelModel,
    candidate_inputs: Sequence[IidInput],
    n_grid: Sequence[int],
    eps: float = DEFAULT_TAIL_EPS,
    witness_grid: Sequence[int] = (6, 9, 12),
    witness_schedule: Optional[GammaSchedule] = None,
    tol: float = 0.0,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> SeparationReport:
    """Compare source and channel rate estimates, then build a witness.

    When the pessimistic source rate sits below the capacity estimate,
    a two-step code at the midpoint rate is constructed on the witness
    grid and its exact error is reported next to the matching
    separation bound. The necessary transmissibility inequalities
    (optimistic source rate against the capacity estimate, pessimistic
    source rate against the sup-information estimate) are reported with
    their margins; a violated pessimistic inequality rules out
    transmission with vanishing error for every code.
    """
    reports = rate_functionals(n_grid, eps, src=src, ch=ch,
                               candidate_inputs=candidate_inputs, budget=budget)
    rf = report_value(reports, "Rf")
    urf = report_value(reports, "underline_Rf")
    c_low = report_value(reports, "C_lower")
    oc_low = report_value(reports, "overline_C_lower")
    best_label = next(r.input_label for r in reports if r.quantity == "C_lower")
    best_input = next(i for i in candidate_inputs if i.label == best_label)

    margin = c_low - rf
    separable = margin > 0.0
    witness: list[tuple[int, float, float]] = []
    c_mid = math.nan
    if separable:
        c_mid = 0.5 * (rf + c_low)
        sched = witness_schedule or GammaSchedule.power(c=0.25, p=0.5)
        for i, n in enumerate(_checked_grid(witness_grid)):
            g = sched.at(n, i)
            _, err = two_step_code(src, ch, best_input, c_mid, g, n, budget, seed=seed)
            bnd = separation_bound(src, ch, best_input, c_mid, g, n, budget)
            witness.append((n, err.average_error, bnd.bound_value))

    return SeparationReport(
        rf=rf,
        underline_rf=urf,
        c_lower=c_low,
        overline_c_lower=oc_low,
        separable_on_grid=separable,
        rate_margin=margin,
        necessary_pessimistic_ok=bool(rf <= oc_low + tol),
        necessary_pessimistic_margin=float(rf - oc_low),
        necessary_optimistic_ok=bool(urf <= c_low + tol),
        necessary_optimistic_margin=float(urf - c_low),
        witness=tuple(witness),
        witness_rate_c=float(c_mid),
    )
