"""Figure rendering for the report command.

Uses the Agg backend unconditionally so reports render identically on
headless machines, and pins the PNG metadata so a re-run writes the
same bytes.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analysis import ConditionTrace, RateReport  # noqa: E402
from .bounds import BoundReport  # noqa: E402
from .spectra import Spectrum  # noqa: E402

SAVEFIG = dict(dpi=150, metadata={"Software": "jsclab"})


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, **SAVEFIG)
    plt.close(fig)
    return path


def plot_spectra(spectra: Sequence[Spectrum], labels: Sequence[str], path: str,
                 title: str = "normalized information spectrum") -> str:
    """Stem plot of atom masses for one or more spectra."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for spec, label in zip(spectra, labels):
        markerline, stemlines, _ = ax.stem(spec.values, spec.masses, label=label)
        plt.setp(markerline, markersize=3)
        plt.setp(stemlines, linewidth=1)
        if spec.pos_inf_mass > 0:
            ax.plot([], [], " ", label=f"{label}: +inf mass {spec.pos_inf_mass:.3g}")
    ax.set_xlabel("nats per symbol")
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def plot_trace(trace: ConditionTrace, path: str) -> str:
    """All terms of a condition trace against blocklength, log y."""
    fig, ax = plt.subplots(figsize=(7, 4))
    positive = False
    for name in trace.term_names:
        if name == "threshold_c":
            continue
        series = trace.series(name)
        positive = positive or any(v > 0 for v in series)
        ax.plot(trace.n_grid, series, marker="o", markersize=4, label=name)
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("probability")
    ax.set_title(f"{trace.condition} ({trace.verdict})")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def plot_bounds(reports: Sequence[BoundReport], path: str,
                errors: Optional[Sequence[tuple[int, float]]] = None) -> str:
    """Bound values against blocklength, optionally with exact errors."""
    fig, ax = plt.subplots(figsize=(7, 4))
    by_kind: dict[str, list[tuple[int, float]]] = {}
    for r in reports:
        by_kind.setdefault(r.kind, []).append((r.n, r.clamped))
    for kind, points in by_kind.items():
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker="s", markersize=4, label=kind)
    if errors:
        pts = sorted(errors)
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="x", linestyle="--", label="exact error")
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("error probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("finite-blocklength bounds")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def plot_rate_thresholds(reports: Sequence[RateReport], path: str) -> str:
    """Per-n tail thresholds behind each rate estimate."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for r in reports:
        est = r.estimate
        label = r.quantity if not r.input_label else f"{r.quantity} ({r.input_label})"
        ys = [t if math.isfinite(t) else float("nan") for t in est.per_n_threshold]
        ax.plot(est.n_grid, ys, marker="o", markersize=4, label=label)
        if math.isfinite(est.estimate):
            ax.axhline(est.estimate, color=ax.lines[-1].get_color(),
                       linewidth=0.8, linestyle=":")
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("nats per symbol")
    ax.set_title("rate-functional tail thresholds")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)
