"""Finite-blocklength achievability and converse bounds.

All three bounds share one structure: a spectral probability evaluated
exactly on a joint or marginal spectrum, plus the exponential penalty
e^(-n gamma). The achievability side upper-bounds the error of the best
code; the converse side lower-bounds the error of every code whose
encoder is a deterministic function of the source block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .models import (
    DEFAULT_BUDGET,
    ChannelModel,
    InputModel,
    SourceModel,
    entropy_spectrum,
    information_spectrum,
)
from .spectra import JointSpectrum, ccdf, cdf

BOUND_KINDS = ("feinstein_upper", "verdu_han_lower", "separation_upper")

# n * gamma_n at which e^(-n gamma_n) drops below ~5e-5 and the penalty
# stops dominating a vanishing spectral term.
BOUND_ACTIVE_LEVEL = 10.0


@dataclass(frozen=True)
class GammaSchedule:
    """Slack schedule gamma_n for the threshold bounds.

    The power form c * n^(-p) with 0 < p < 1 vanishes while n * gamma_n
    grows, which is what drives both limit theorems. Constant schedules
    are legal for single-n studies but flagged by gamma_values since
    the penalty term never vanishes relative to them.
    """

    kind: str
    c: float = 0.0
    p: float = 0.0
    values: tuple[float, ...] = ()

    @classmethod
    def power(cls, c: float = 1.0, p: float = 0.5) -> "GammaSchedule":
        if c <= 0.0:
            raise ValueError(f"power schedule needs c > 0, got {c}")
        if not (0.0 < p < 1.0):
            raise ValueError(f"power schedule needs 0 < p < 1, got {p}")
        return cls(kind="power", c=float(c), p=float(p))

    @classmethod
    def constant(cls, value: float) -> "GammaSchedule":
        if value <= 0.0:
            raise ValueError(f"gamma must be positive, got {value}")
        return cls(kind="constant", c=float(value))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "GammaSchedule":
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0.0 for v in vals):
            raise ValueError("explicit schedule needs positive values")
        return cls(kind="explicit", values=vals)

    def at(self, n: int, index: Optional[int] = None) -> float:
        if self.kind == "power":
            return self.c * float(n) ** (-self.p)
        if self.kind == "constant":
            return self.c
        if index is None:
            raise ValueError("explicit schedule needs the grid index")
        return self.values[index]


@dataclass(frozen=True)
class GammaValues:
    """Schedule evaluated on a grid, with vanishing-penalty bookkeeping."""

    n_grid: tuple[int, ...]
    values: tuple[float, ...]
    bound_active_n: Optional[int]
    flags: tuple[str, ...]


def gamma_values(schedule: GammaSchedule, n_grid: Sequence[int]) -> GammaValues:
    """Evaluate a schedule on a blocklength grid.

    For power schedules, bound_active_n is the first grid point with
    n * gamma_n >= 10, marking where the exponential penalty stops
    masking the spectral term.
    """
    grid = tuple(int(n) for n in n_grid)
    if any(n < 1 for n in grid):
        raise ValueError("blocklengths must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if schedule.kind == "explicit" and len(schedule.values) != len(grid):
        raise ValueError(
            f"explicit schedule has {len(schedule.values)} values for {len(grid)} grid points"
        )
    vals = tuple(schedule.at(n, i) for i, n in enumerate(grid))
    flags: tuple[str, ...] = ()
    active = None
    if schedule.kind == "constant":
        flags = ("constant-gamma-does-not-vanish",)
    for n, g in zip(grid, vals):
        if n * g >= BOUND_ACTIVE_LEVEL:
            active = n
            break
    return GammaValues(n_grid=grid, values=vals, bound_active_n=active, flags=flags)


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: spectral term, penalty, and their combination."""

    kind: str
    n: int
    gamma: float
    spectral_term: float
    exponential_term: float
    bound_value: float
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        # separation sums two probabilities, the other kinds carry one
        cap = 2.0 if self.kind == "separation_upper" else 1.0
        if not (-1e-12 <= self.spectral_term <= cap + 1e-12):
            raise ValueError(f"spectral term out of range: {self.spectral_term}")

    @property
    def clamped(self) -> float:
        """bound_value cut to [0, 1] for plotting."""
        return min(max(self.bound_value, 0.0), 1.0)


def event_mass_a_le_b_plus(joint: JointSpectrum, offset: float) -> float:
    """Pr{A <= B + offset} on a joint spectrum.

    Atoms with A = +inf never satisfy the event; atoms with B = +inf
    always do (for finite A), both following from the sentinel's meaning
    as an unbounded statistic.
    """
    a, b, m = joint.a_values, joint.b_values, joint.masses
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(a) & (a <= b + offset)
    return float(math.fsum(m[ok].tolist()))


def feinstein_bound(joint: JointSpectrum, gamma: float) -> BoundReport:
    """Achievability: some code has average error <= Pr{A <= B + gamma} + e^(-n gamma).

    The witness is the random threshold code whose codewords follow the
    conditional input law baked into the joint spectrum; its exact
    ensemble error sits below this value.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    spectral = event_mass_a_le_b_plus(joint, gamma)
    expo = math.exp(-joint.n * gamma)
    return BoundReport(
        kind="feinstein_upper",
        n=joint.n,
        gamma=float(gamma),
        spectral_term=spectral,
        exponential_term=expo,
        bound_value=spectral + expo,
    )


def verdu_han_bound(joint: JointSpectrum, gamma: float) -> BoundReport:
    """Converse: every code has average error >= Pr{A <= B - gamma} - e^(-n gamma).

    The joint must be the coupling an actual deterministic encoder
    induces (channel input a function of the source block); that is the
    caller's responsibility and is what joint_density_spectrum produces
    for encoder inputs.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    spectral = event_mass_a_le_b_plus(joint, -gamma)
    expo = math.exp(-joint.n * gamma)
    unclamped = spectral - expo
    return BoundReport(
        kind="verdu_han_lower",
        n=joint.n,
        gamma=float(gamma),
        spectral_term=spectral,
        exponential_term=expo,
        bound_value=max(0.0, unclamped),
        components={"unclamped": unclamped},
    )


def separation_bound(
    src: SourceModel,
    ch: ChannelModel,
    inp: InputModel,
    c: float,
    gamma: float,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> BoundReport:
    """Two-step achievability at source-coding rate c.

    Bounds the error of separated source and channel coding by
    Pr{B >= c} + Pr{A <= c + gamma} + e^(-n gamma): source overflow
    above rate c, channel density at or below the threshold, penalty.
    Both probabilities include their boundary atoms.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    b_spec = entropy_spectrum(src, n, budget)
    a_spec = information_spectrum(ch, inp, n, budget)
    source_term = ccdf(b_spec, c)
    channel_term = cdf(a_spec, c + gamma)
    expo = math.exp(-n * gamma)
    spectral = source_term + channel_term
    return BoundReport(
        kind="separation_upper",
        n=int(n),
        gamma=float(gamma),
        spectral_term=spectral,
        exponential_term=expo,
        bound_value=spectral + expo,
        components={"source_term": source_term, "channel_term": channel_term, "rate_c": float(c)},
    )
