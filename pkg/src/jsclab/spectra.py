"""Exact discrete distributions of normalized information statistics.

A Spectrum is the exact law of a per-symbol statistic in nats at one
blocklength n, stored as sorted atoms plus an explicit +inf sentinel
mass for zero-probability outcomes. Keeping the sentinel explicit makes
total mass exactly 1 and keeps upper-tail probabilities conservative:
an outcome at +inf exceeds every finite threshold.

All logarithms throughout the package are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Absolute tolerance for collapsing adjacent atom values.
MERGE_TOL = 1e-12
# Tolerance on total-mass bookkeeping.
MASS_TOL = 1e-12
# Two limit-estimate thresholds are "the same" below this many nats.
STABILIZATION_TOL = 1e-3

PLIM_MODES = ("p-limsup", "p-liminf", "optimistic-limsup", "optimistic-liminf")

DEFAULT_TAIL_EPS = 1e-3


def _merge_sorted(values: np.ndarray, masses: np.ndarray, tol: float = MERGE_TOL):
    """Collapse atoms whose values sit within tol of their neighbor.

    Input must be sorted by value. Merged atoms take the mass-weighted
    mean value, which keeps the distribution mean exact.
    """
    if len(values) == 0:
        return values, masses
    starts = np.empty(len(values), dtype=bool)
    starts[0] = True
    starts[1:] = np.diff(values) > tol
    ids = np.cumsum(starts) - 1
    msum = np.bincount(ids, weights=masses)
    vsum = np.bincount(ids, weights=values * masses)
    keep = msum > 0.0
    return vsum[keep] / msum[keep], msum[keep]


@dataclass(frozen=True)
class Spectrum:
    """Sorted atoms (values, masses) of a normalized statistic at blocklength n.

    Invariants enforced at construction: values strictly increasing with
    gaps above the merge tolerance, all masses positive, and
    sum(masses) + pos_inf_mass == 1 within the mass tolerance.
    """

    values: np.ndarray
    masses: np.ndarray
    pos_inf_mass: float
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)
        if v.ndim != 1 or m.ndim != 1 or len(v) != len(m):
            raise ValueError("values and masses must be parallel 1-D arrays")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"blocklength n must be a positive integer, got {self.n!r}")
        if len(v) and not np.all(np.isfinite(v)):
            raise ValueError("atom values must be finite (use pos_inf_mass for +inf)")
        if len(v) > 1 and not np.all(np.diff(v) > MERGE_TOL):
            raise ValueError("atom values must be strictly increasing beyond the merge tolerance")
        if len(m) and not np.all(m > 0.0):
            raise ValueError("atom masses must be strictly positive")
        if not (0.0 <= self.pos_inf_mass <= 1.0):
            raise ValueError(f"pos_inf_mass out of [0, 1]: {self.pos_inf_mass}")
        total = math.fsum(m.tolist()) + self.pos_inf_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, expected 1 within {MASS_TOL}")
        v.setflags(write=False)
        m.setflags(write=False)

    @classmethod
    def from_outcomes(cls, values: Iterable[float], masses: Iterable[float], n: int) -> "Spectrum":
        """Build a Spectrum from raw (value, mass) outcomes.

        Zero-mass outcomes are dropped, +inf values are folded into
        pos_inf_mass, and nearby values are merged. A -inf value with
        positive mass is rejected: no normalized information statistic
        in this package takes -inf on its support.
        """
        v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        m = np.asarray(list(masses) if not isinstance(masses, np.ndarray) else masses, dtype=float)
        if v.shape != m.shape:
            raise ValueError("values and masses must have equal length")
        keep = m > 0.0
        v, m = v[keep], m[keep]
        if np.any(np.isneginf(v)):
            raise ValueError("-inf outcome with positive mass")
        inf_mask = np.isposinf(v)
        pos_inf = float(math.fsum(m[inf_mask].tolist()))
        v, m = v[~inf_mask], m[~inf_mask]
        order = np.argsort(v, kind="stable")
        v, m = _merge_sorted(v[order], m[order])
        # a merged representative can land within tolerance of its
        # neighbor when clusters chain; repeat until gaps are strict
        while len(v) > 1 and np.min(np.diff(v)) <= MERGE_TOL:
            v, m = _merge_sorted(v, m)
        return cls(values=v, masses=m, pos_inf_mass=pos_inf, n=int(n))

    @classmethod
    def point_mass(cls, value: float, n: int) -> "Spectrum":
        return cls.from_outcomes([value], [1.0], n)

    def mean(self) -> float:
        """Expected statistic; +inf when any mass sits on the sentinel."""
        if self.pos_inf_mass > 0.0:
            return math.inf
        return float(np.dot(self.values, self.masses))


def ccdf(spectrum: Spectrum, t: float) -> float:
    """Pr{statistic >= t}, counting the +inf sentinel mass."""
    if math.isnan(t):
        raise ValueError("threshold is NaN")
    idx = int(np.searchsorted(spectrum.values, t, side="left"))
    return float(spectrum.masses[idx:].sum() + spectrum.pos_inf_mass)


def cdf(spectrum: Spectrum, t: float) -> float:
    """Pr{statistic <= t}; the sentinel counts only at t = +inf."""
    if math.isnan(t):
        raise ValueError("threshold is NaN")
    if math.isinf(t) and t > 0:
        return 1.0
    idx = int(np.searchsorted(spectrum.values, t, side="right"))
    return float(spectrum.masses[:idx].sum())


def atom_mass(spectrum: Spectrum, t: float) -> float:
    """Mass exactly at t (0.0 when t is not an atom)."""
    idx = int(np.searchsorted(spectrum.values, t, side="left"))
    if idx < len(spectrum.values) and spectrum.values[idx] == t:
        return float(spectrum.masses[idx])
    return 0.0


def quantile(spectrum: Spectrum, p: float) -> float:
    """Left-continuous inverse of the cdf: min{t : cdf(t) >= p}.

    Returns +inf when the finite atoms cannot cover p, which happens
    exactly when p exceeds 1 - pos_inf_mass.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"quantile level out of [0, 1]: {p}")
    if len(spectrum.values) == 0:
        return math.inf
    cum = np.cumsum(spectrum.masses)
    idx = int(np.searchsorted(cum, p, side="left"))
    if idx >= len(cum):
        return math.inf
    return float(spectrum.values[idx])


def _convolve_pair(v1, m1, v2, m2):
    """Exact sum-convolution of two finitely supported distributions.

    Products below the smallest normal double are dropped: subnormal
    masses carry too few bits for the merge step's weighted means, and
    their total is hundreds of orders below the mass tolerance.
    """
    v = (v1[:, None] + v2[None, :]).ravel()
    m = (m1[:, None] * m2[None, :]).ravel()
    keep = m >= np.finfo(float).tiny
    v, m = v[keep], m[keep]
    order = np.argsort(v, kind="stable")
    return _merge_sorted(v[order], m[order])


def _compositions(total: int, parts: int):
    """Yield all tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _multinomial_convolve(values, masses, n):
    """Sum of n iid per-letter draws, grouped by letter counts.

    Masses come out of exp(log-multinomial) so they carry a relative
    error of about 1e-12 at n ~ 2000, inside the per-atom test tolerance.
    """
    k = len(values)
    counts = np.array(list(_compositions(n, k)), dtype=np.int64)
    logfact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, n + 1)))])
    logm = logfact[n] - logfact[counts].sum(axis=1) + counts @ np.log(masses)
    return counts.astype(float) @ values, np.exp(logm)


def convolve_iid(per_letter: Spectrum, n: int, method: str = "auto") -> Spectrum:
    """Exact law of the average of n iid copies of a per-letter statistic.

    The finite part is convolved exactly; sentinel mass propagates as
    1 - (1 - pos_inf_mass)^n because the average is +inf as soon as one
    letter is. `method` picks the convolution strategy: "pairwise"
    iterates exact pair convolutions, "multinomial" enumerates letter
    count vectors (faster when the per-letter support is small but n is
    large), "auto" chooses by projected cost.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if per_letter.n != 1:
        raise ValueError(f"per-letter spectrum must have n = 1, got n = {per_letter.n}")
    if method not in ("auto", "pairwise", "multinomial"):
        raise ValueError(f"unknown convolution method {method!r}")

    k = len(per_letter.values)
    if k == 0:
        return Spectrum(np.empty(0), np.empty(0), pos_inf_mass=1.0, n=int(n))

    atom_bound = math.comb(n + k - 1, k - 1)
    if method == "auto":
        # pairwise cost grows like n * final atom count
        method = "pairwise" if n * atom_bound <= 2 * 10**7 else "multinomial"
    if method == "multinomial" and atom_bound > 3 * 10**6:
        raise ValueError(
            f"iid convolution needs about {atom_bound} letter-count vectors at "
            f"n = {n}; reduce n or the per-letter support"
        )

    # Normalize before convolving: sums then stay on the per-letter
    # scale, so one ULP of drift between equal letter-count paths sits
    # far below the merge tolerance even at n in the thousands.
    norm_v = per_letter.values / n
    if method == "pairwise":
        cur_v = np.zeros(1)
        cur_m = np.ones(1)
        for _ in range(n):
            cur_v, cur_m = _convolve_pair(cur_v, cur_m, norm_v, per_letter.masses)
    else:
        cur_v, cur_m = _multinomial_convolve(norm_v, per_letter.masses, n)

    if per_letter.pos_inf_mass > 0.0:
        pos_inf = 1.0 - (1.0 - per_letter.pos_inf_mass) ** n
    else:
        pos_inf = 0.0
    out = np.concatenate([cur_v, [math.inf]])
    return Spectrum.from_outcomes(out, np.concatenate([cur_m, [pos_inf]]), n=int(n))


def mix_spectra(components: Sequence[tuple[float, Spectrum]]) -> Spectrum:
    """Weight-mixture of spectra sharing one blocklength."""
    if not components:
        raise ValueError("empty mixture")
    weights = [w for w, _ in components]
    if any(w <= 0 for w in weights):
        raise ValueError("mixture weights must be positive")
    if abs(math.fsum(weights) - 1.0) > MASS_TOL:
        raise ValueError(f"mixture weights sum to {math.fsum(weights)!r}, expected 1")
    ns = {s.n for _, s in components}
    if len(ns) != 1:
        raise ValueError(f"component spectra disagree on n: {sorted(ns)}")
    n = ns.pop()
    values = np.concatenate([s.values for _, s in components])
    masses = np.concatenate([w * s.masses for w, s in components])
    pos_inf = math.fsum(w * s.pos_inf_mass for w, s in components)
    values = np.concatenate([values, [math.inf]])
    masses = np.concatenate([masses, [pos_inf]])
    return Spectrum.from_outcomes(values, masses, n=n)


def mixture_sandwich(
    components: Sequence[tuple[float, Spectrum]], n: int
) -> tuple[Spectrum, Spectrum]:
    """Bracketing spectra for the self-information of a mixed pmf.

    For a mixture P = sum_i w_i P_i the bound w_i P_i <= P gives, for
    every outcome of component i, a statistic at most the component's
    own statistic plus (1/n) ln(1/w_i). Mixing the shifted component
    spectra therefore stochastically dominates the exact mixed spectrum
    (the upper bracket). The unshifted mixture (the lower bracket) is the
    classical companion estimate: it carries the exact support floor and
    agrees with the exact spectrum up to the vanishing (1/n) ln(1/w_i)
    shifts, but for components with overlapping supports it can cross
    the exact spectrum at small n, so only the upper bracket and the
    support bounds are guaranteed pointwise.
    """
    lo = mix_spectra(components)
    if lo.n != n:
        raise ValueError(f"component spectra are at n = {lo.n}, expected {n}")
    shifted = []
    for w, s in components:
        shift = math.log(1.0 / w) / n
        shifted.append((w, Spectrum(s.values + shift, s.masses, s.pos_inf_mass, s.n)))
    hi = mix_spectra(shifted)
    return lo, hi


@dataclass(frozen=True)
class LimitEstimate:
    """Finite-grid estimate of a probabilistic limsup/liminf threshold."""

    n_grid: tuple[int, ...]
    per_n_threshold: tuple[float, ...]
    estimate: float
    mode: str
    eps: float
    converged: bool

    def __post_init__(self):
        if self.mode not in PLIM_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.n_grid) != len(self.per_n_threshold):
            raise ValueError("grid and thresholds must be parallel")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")


def upper_tail_threshold(spectrum: Spectrum, eps: float) -> float:
    """Smallest atom t with Pr{statistic > t} <= eps (+inf if none)."""
    if spectrum.pos_inf_mass > eps or len(spectrum.values) == 0:
        return math.inf
    # tail_after[k] = mass strictly above atom k
    tail_after = (
        np.concatenate([np.cumsum(spectrum.masses[::-1])[::-1][1:], [0.0]])
        + spectrum.pos_inf_mass
    )
    idx = int(np.argmax(tail_after <= eps))
    return float(spectrum.values[idx])


def lower_tail_threshold(spectrum: Spectrum, eps: float) -> float:
    """Largest atom t with Pr{statistic < t} <= eps (+inf if no atoms)."""
    if len(spectrum.values) == 0:
        return math.inf
    below = np.concatenate([[0.0], np.cumsum(spectrum.masses)[:-1]])
    ok = np.flatnonzero(below <= eps)
    return float(spectrum.values[ok[-1]])


def estimate_plim(
    spectra: Sequence[Spectrum],
    mode: str = "p-limsup",
    eps: float = DEFAULT_TAIL_EPS,
) -> LimitEstimate:
    """Estimate a probabilistic limit threshold from per-n spectra.

    Per-n thresholds are eps-tail quantiles: the upper tail for limsup
    modes, the lower tail for liminf modes. Pessimistic modes report the
    final-grid threshold; optimistic modes take the min (limsup) or max
    (liminf) across the grid, mirroring a liminf over n of the tail
    condition. `converged` means the last three thresholds agree within
    STABILIZATION_TOL.
    """
    if mode not in PLIM_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {PLIM_MODES}")
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    if len(spectra) < 3:
        raise ValueError("need at least 3 grid points to estimate a limit")
    ns = [s.n for s in spectra]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("spectra must come in strictly increasing n order")

    if mode in ("p-limsup", "optimistic-limsup"):
        thresholds = [upper_tail_threshold(s, eps) for s in spectra]
    else:
        thresholds = [lower_tail_threshold(s, eps) for s in spectra]

    if mode == "p-limsup" or mode == "p-liminf":
        estimate = thresholds[-1]
    elif mode == "optimistic-limsup":
        estimate = min(thresholds)
    else:
        estimate = max(thresholds)

    last3 = thresholds[-3:]
    if all(math.isinf(t) for t in last3):
        converged = True
    elif any(math.isinf(t) for t in last3):
        converged = False
    else:
        converged = (max(last3) - min(last3)) <= STABILIZATION_TOL

    return LimitEstimate(
        n_grid=tuple(int(n) for n in ns),
        per_n_threshold=tuple(float(t) for t in thresholds),
        estimate=float(estimate),
        mode=mode,
        eps=float(eps),
        converged=converged,
    )


@dataclass(frozen=True)
class JointSpectrum:
    """Joint atoms of (channel density A, source statistic B) at one n.

    b_values may contain +inf (zero-probability source outcomes kept by
    an upstream construction); a_values at +inf are allowed for the same
    reason. Masses are positive and sum to 1.
    """

    a_values: np.ndarray
    b_values: np.ndarray
    masses: np.ndarray
    n: int

    def __post_init__(self):
        a = np.asarray(self.a_values, dtype=float)
        b = np.asarray(self.b_values, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "a_values", a)
        object.__setattr__(self, "b_values", b)
        object.__setattr__(self, "masses", m)
        if not (a.ndim == b.ndim == m.ndim == 1 and len(a) == len(b) == len(m)):
            raise ValueError("a_values, b_values, masses must be parallel 1-D arrays")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"blocklength n must be a positive integer, got {self.n!r}")
        if len(m) and not np.all(m > 0.0):
            raise ValueError("joint masses must be strictly positive")
        if np.any(np.isneginf(a)) or np.any(np.isneginf(b)):
            raise ValueError("-inf joint atom with positive mass")
        total = math.fsum(m.tolist())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"joint masses sum to {total!r}, expected 1 within {MASS_TOL}")
        for arr in (a, b, m):
            arr.setflags(write=False)

    @classmethod
    def from_atoms(cls, a_values, b_values, masses, n: int) -> "JointSpectrum":
        """Build from raw atoms, dropping zero mass and merging duplicates."""
        a = np.asarray(a_values, dtype=float)
        b = np.asarray(b_values, dtype=float)
        m = np.asarray(masses, dtype=float)
        keep = m > 0.0
        a, b, m = a[keep], b[keep], m[keep]
        order = np.lexsort((b, a))
        a, b, m = a[order], b[order], m[order]
        if len(a):
            with np.errstate(invalid="ignore"):
                da = np.abs(np.diff(a))
                db = np.abs(np.diff(b))
            same = np.zeros(len(a), dtype=bool)
            # treat inf == inf as a duplicate coordinate
            same_a = (da <= MERGE_TOL) | (np.isposinf(a[1:]) & np.isposinf(a[:-1]))
            same_b = (db <= MERGE_TOL) | (np.isposinf(b[1:]) & np.isposinf(b[:-1]))
            same[1:] = same_a & same_b
            ids = np.cumsum(~same) - 1
            msum = np.bincount(ids, weights=m)
            first = np.flatnonzero(~same)
            a, b, m = a[first], b[first], msum
        return cls(a_values=a, b_values=b, masses=m, n=int(n))

    @classmethod
    def from_independent(cls, a: Spectrum, b: Spectrum) -> "JointSpectrum":
        """Product coupling of independent channel and source spectra."""
        if a.n != b.n:
            raise ValueError(f"spectra disagree on n: {a.n} vs {b.n}")
        av = np.concatenate([a.values, [math.inf]]) if a.pos_inf_mass > 0 else a.values
        am = np.concatenate([a.masses, [a.pos_inf_mass]]) if a.pos_inf_mass > 0 else a.masses
        bv = np.concatenate([b.values, [math.inf]]) if b.pos_inf_mass > 0 else b.values
        bm = np.concatenate([b.masses, [b.pos_inf_mass]]) if b.pos_inf_mass > 0 else b.masses
        aa = np.repeat(av, len(bv))
        bb = np.tile(bv, len(av))
        mm = (am[:, None] * bm[None, :]).ravel()
        return cls.from_atoms(aa, bb, mm, n=a.n)

    def marginal_a(self) -> Spectrum:
        return Spectrum.from_outcomes(self.a_values, self.masses, self.n)

    def marginal_b(self) -> Spectrum:
        return Spectrum.from_outcomes(self.b_values, self.masses, self.n)
