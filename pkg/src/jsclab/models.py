"""Source, channel, and channel-input models with exact finite-n laws.

Two block semantics coexist. Product models (IidSource, DmcChannel)
extend a per-letter law to alphabet^n at blocklength n. Flat models
(TableSource, TableChannel, UniformMessageSource) treat blocklength n
as an index into a schedule of single-use laws, which is how per-n
varying alphabets (message sets, the ternary gap instance) are handled.
The 1/n normalization of every statistic applies in both cases.

Outcomes are always plain 0-based indices; product blocks are flattened
row-major, so sequence (a_1 ... a_n) maps to sum a_i * k^(n-i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .spectra import (
    MASS_TOL,
    JointSpectrum,
    Spectrum,
    convolve_iid,
    mix_spectra,
    mixture_sandwich,
)

# Dense enumeration ceiling (number of joint outcomes materialized).
DEFAULT_BUDGET = 10**6


class BudgetError(RuntimeError):
    """An exact computation would exceed the configured enumeration budget."""


def _check_pmf(p, what: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError(f"{what} must be a nonempty 1-D probability vector")
    if np.any(arr < 0.0):
        raise ValueError(f"{what} has negative entries")
    total = math.fsum(arr.tolist())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{what} sums to {total!r}, expected 1 within 1e-9")
    return arr


def _check_kernel(w, what: str) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{what} must be a nonempty 2-D row-stochastic matrix")
    if np.any(arr < 0.0):
        raise ValueError(f"{what} has negative entries")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(f"{what} row {bad} sums to {sums[bad]!r}, expected 1 within 1e-9")
    return arr


def _kron_power(vec: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, vec)
    return out


# ---------------------------------------------------------------------------
# sources


@dataclass(frozen=True, eq=False)
class IidSource:
    """Memoryless source; blocklength n lives on alphabet^n."""

    pmf: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pmf", tuple(float(x) for x in self.pmf))
        _check_pmf(self.pmf, "source pmf")

    @property
    def label(self) -> str:
        return "iid[" + ",".join(f"{p:g}" for p in self.pmf) + "]"


@dataclass(frozen=True, eq=False)
class UniformMessageSource:
    """Uniform messages; blocklength n carries size(n) equiprobable outcomes."""

    sizes: Union[Callable[[int], int], Mapping[int, int]]

    def size(self, n: int) -> int:
        m = self.sizes(n) if callable(self.sizes) else self.sizes[n]
        m = int(m)
        if m < 1:
            raise ValueError(f"message count must be >= 1, got {m} at n = {n}")
        return m

    @classmethod
    def at_rate(cls, rate: float) -> "UniformMessageSource":
        """ceil(e^(rate * n)) messages, rate in nats per channel use."""
        if rate <= 0:
            raise ValueError(f"message rate must be positive, got {rate}")
        return cls(sizes=lambda n: math.ceil(math.exp(rate * n)))

    @property
    def label(self) -> str:
        return "uniform_message"


@dataclass(frozen=True, eq=False)
class MixedSource:
    """Convex mixture of sources sharing each blocklength's outcome space."""

    components: tuple[tuple[float, "SourceModel"], ...]

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 1:
            raise ValueError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, expected 1")

    @property
    def label(self) -> str:
        inner = "+".join(f"{w:g}*{s.label}" for w, s in self.components)
        return f"mixed({inner})"


@dataclass(frozen=True, eq=False)
class TableSource:
    """Explicit per-n pmf schedule over flat outcome spaces."""

    pmfs: Union[Callable[[int], Sequence[float]], Mapping[int, Sequence[float]]]

    @classmethod
    def constant(cls, pmf: Sequence[float]) -> "TableSource":
        frozen = tuple(float(x) for x in pmf)
        return cls(pmfs=lambda n: frozen)

    def table(self, n: int) -> np.ndarray:
        raw = self.pmfs(n) if callable(self.pmfs) else self.pmfs[n]
        return _check_pmf(raw, f"source table at n = {n}")

    @property
    def label(self) -> str:
        return "table"


SourceModel = Union[IidSource, UniformMessageSource, MixedSource, TableSource]


def source_size(src: SourceModel, n: int) -> int:
    if isinstance(src, IidSource):
        return len(src.pmf) ** n
    if isinstance(src, UniformMessageSource):
        return src.size(n)
    if isinstance(src, MixedSource):
        sizes = {source_size(s, n) for _, s in src.components}
        if len(sizes) != 1:
            raise ValueError(f"mixture components disagree on outcome count at n = {n}")
        return sizes.pop()
    if isinstance(src, TableSource):
        return len(src.table(n))
    raise TypeError(f"not a source model: {src!r}")


def source_pmf(src: SourceModel, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Dense pmf over the n-th outcome space; BudgetError when too large."""
    size = source_size(src, n)
    if size > budget:
        raise BudgetError(f"source outcome space has {size} points, budget is {budget}")
    if isinstance(src, IidSource):
        return _kron_power(np.asarray(src.pmf), n)
    if isinstance(src, UniformMessageSource):
        return np.full(size, 1.0 / size)
    if isinstance(src, MixedSource):
        out = np.zeros(size)
        for w, s in src.components:
            out += w * source_pmf(s, n, budget)
        return out
    return src.table(n)


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True, eq=False)
class DmcChannel:
    """Memoryless channel; blocklength n acts letterwise on alphabet^n."""

    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        mat = tuple(tuple(float(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", mat)
        _check_kernel(mat, "channel matrix")

    @property
    def label(self) -> str:
        return f"dmc{len(self.matrix)}x{len(self.matrix[0])}"


@dataclass(frozen=True, eq=False)
class MixedChannel:
    """Convex mixture of channels sharing input and output spaces."""

    components: tuple[tuple[float, "ChannelModel"], ...]

    def __post_init__(self):
        comps = tuple((float(w), c) for w, c in self.components)
        object.__setattr__(self, "components", comps)
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, expected 1")

    @property
    def label(self) -> str:
        inner = "+".join(f"{w:g}*{c.label}" for w, c in self.components)
        return f"mixed({inner})"


@dataclass(frozen=True, eq=False)
class TableChannel:
    """Explicit per-n kernel schedule over flat input/output spaces."""

    kernels: Union[Callable[[int], Sequence[Sequence[float]]], Mapping[int, Sequence[Sequence[float]]]]

    @classmethod
    def constant(cls, kernel: Sequence[Sequence[float]]) -> "TableChannel":
        frozen = tuple(tuple(float(x) for x in row) for row in kernel)
        return cls(kernels=lambda n: frozen)

    def table(self, n: int) -> np.ndarray:
        raw = self.kernels(n) if callable(self.kernels) else self.kernels[n]
        return _check_kernel(raw, f"channel table at n = {n}")

    @property
    def label(self) -> str:
        return "table"


ChannelModel = Union[DmcChannel, MixedChannel, TableChannel]


def bsc(p: float) -> DmcChannel:
    """Binary symmetric channel with crossover probability p."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"crossover probability out of [0, 1]: {p}")
    return DmcChannel(matrix=((1.0 - p, p), (p, 1.0 - p)))


def noiseless_channel(size: int) -> DmcChannel:
    return DmcChannel(matrix=tuple(tuple(np.eye(size)[i]) for i in range(size)))


def deterministic_channel(mapping: Sequence[int], num_outputs: int) -> DmcChannel:
    """Per-letter deterministic map input -> output as a 0/1 kernel."""
    rows = []
    for x, y in enumerate(mapping):
        if not (0 <= y < num_outputs):
            raise ValueError(f"output {y} of input {x} outside range({num_outputs})")
        row = [0.0] * num_outputs
        row[y] = 1.0
        rows.append(tuple(row))
    return DmcChannel(matrix=tuple(rows))


def channel_letter_sizes(ch: ChannelModel) -> tuple[int, int] | None:
    """Per-letter alphabet sizes when the channel is a product model."""
    if isinstance(ch, DmcChannel):
        return len(ch.matrix), len(ch.matrix[0])
    if isinstance(ch, MixedChannel):
        sizes = {channel_letter_sizes(c) for _, c in ch.components}
        if len(sizes) == 1 and None not in sizes:
            return sizes.pop()
        return None
    return None


def channel_dims(ch: ChannelModel, n: int) -> tuple[int, int]:
    if isinstance(ch, DmcChannel):
        kx, ky = len(ch.matrix), len(ch.matrix[0])
        return kx**n, ky**n
    if isinstance(ch, MixedChannel):
        dims = {channel_dims(c, n) for _, c in ch.components}
        if len(dims) != 1:
            raise ValueError(f"mixture components disagree on dimensions at n = {n}")
        return dims.pop()
    if isinstance(ch, TableChannel):
        k = ch.table(n)
        return k.shape[0], k.shape[1]
    raise TypeError(f"not a channel model: {ch!r}")


def channel_rows(
    ch: ChannelModel, xs: Sequence[int], n: int, budget: int = DEFAULT_BUDGET
) -> np.ndarray:
    """Rows W^n(. | x) for the given block inputs, one per entry of xs."""
    nx, ny = channel_dims(ch, n)
    if len(xs) * ny > budget:
        raise BudgetError(f"materializing {len(xs)} x {ny} kernel rows exceeds budget {budget}")
    if isinstance(ch, DmcChannel):
        mat = np.asarray(ch.matrix)
        kx = mat.shape[0]
        out = np.empty((len(xs), ny))
        for i, x in enumerate(xs):
            if not (0 <= x < nx):
                raise ValueError(f"block input {x} outside range({nx})")
            digits = []
            rem = int(x)
            for _ in range(n):
                digits.append(rem % kx)
                rem //= kx
            row = np.ones(1)
            for d in reversed(digits):
                row = np.kron(row, mat[d])
            out[i] = row
        return out
    if isinstance(ch, MixedChannel):
        out = np.zeros((len(xs), ny))
        for w, c in ch.components:
            out += w * channel_rows(c, xs, n, budget)
        return out
    if isinstance(ch, TableChannel):
        k = ch.table(n)
        return k[np.asarray(xs, dtype=int)]
    raise TypeError(f"not a channel model: {ch!r}")


def channel_kernel(ch: ChannelModel, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Dense W^n as an (inputs x outputs) matrix; BudgetError when too large."""
    nx, ny = channel_dims(ch, n)
    if nx * ny > budget:
        raise BudgetError(f"dense kernel has {nx} x {ny} entries, budget is {budget}")
    if isinstance(ch, TableChannel):
        return ch.table(n)
    return channel_rows(ch, range(nx), n, budget=nx * ny)


# ---------------------------------------------------------------------------
# channel inputs


@dataclass(frozen=True, eq=False)
class IidInput:
    """Product input law from a per-letter pmf.

    Against a flat (table) channel the pmf must already match the n-th
    input space and is used as-is; there is no product structure to
    extend in that case.
    """

    pmf: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "pmf", tuple(float(x) for x in self.pmf))
        _check_pmf(self.pmf, "input pmf")

    @property
    def label(self) -> str:
        return "iid[" + ",".join(f"{p:g}" for p in self.pmf) + "]"


@dataclass(frozen=True, eq=False)
class EncoderInput:
    """Input induced by a deterministic encoder applied to the source."""

    codes: Union[Callable[[int], "object"], Mapping[int, "object"]]

    def code_for(self, n: int):
        return self.codes(n) if callable(self.codes) else self.codes[n]

    @classmethod
    def fixed(cls, code) -> "EncoderInput":
        # a concrete code exists at exactly one blocklength
        return cls(codes={code.n: code})

    @property
    def label(self) -> str:
        return "encoder"


@dataclass(frozen=True, eq=False)
class ConditionalInput:
    """Explicit conditional law P(x | v) per blocklength."""

    tables: Union[Callable[[int], Sequence[Sequence[float]]], Mapping[int, Sequence[Sequence[float]]]]

    def table(self, n: int) -> np.ndarray:
        raw = self.tables(n) if callable(self.tables) else self.tables[n]
        return _check_kernel(raw, f"conditional input table at n = {n}")

    @classmethod
    def constant(cls, table: Sequence[Sequence[float]]) -> "ConditionalInput":
        frozen = tuple(tuple(float(x) for x in row) for row in table)
        return cls(tables=lambda n: frozen)

    @property
    def label(self) -> str:
        return "conditional"


InputModel = Union[IidInput, EncoderInput, ConditionalInput]


def input_pmf(inp: InputModel, ch: ChannelModel, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Dense unconditional input law over the n-th channel input space."""
    nx, _ = channel_dims(ch, n)
    if not isinstance(inp, IidInput):
        raise ValueError(
            f"{type(inp).__name__} has no unconditional law; supply the source and use the joint"
        )
    letter = channel_letter_sizes(ch)
    pmf = np.asarray(inp.pmf)
    if letter is not None and len(pmf) == letter[0]:
        if nx > budget:
            raise BudgetError(f"input space has {nx} points, budget is {budget}")
        return _kron_power(pmf, n)
    if len(pmf) == nx:
        return pmf
    raise ValueError(
        f"input pmf length {len(pmf)} matches neither the letter alphabet nor the block space ({nx})"
    )


def conditional_matrix(
    inp: InputModel, src: SourceModel, ch: ChannelModel, n: int, budget: int = DEFAULT_BUDGET
) -> np.ndarray:
    """Dense P(x | v) over (source outcomes) x (channel inputs)."""
    nv = source_size(src, n)
    nx, _ = channel_dims(ch, n)
    if nv * nx > budget:
        raise BudgetError(f"conditional law has {nv} x {nx} entries, budget is {budget}")
    if isinstance(inp, IidInput):
        row = input_pmf(inp, ch, n, budget)
        return np.tile(row, (nv, 1))
    if isinstance(inp, ConditionalInput):
        table = inp.table(n)
        if table.shape != (nv, nx):
            raise ValueError(f"conditional table is {table.shape}, expected {(nv, nx)}")
        return table
    if isinstance(inp, EncoderInput):
        code = inp.code_for(n)
        enc = np.asarray(code.encoder, dtype=int)
        if len(enc) != nv:
            raise ValueError(f"encoder covers {len(enc)} source outcomes, expected {nv}")
        out = np.zeros((nv, nx))
        out[np.arange(nv), enc] = 1.0
        return out
    raise TypeError(f"not an input model: {inp!r}")


def output_law(
    inp: InputModel,
    ch: ChannelModel,
    n: int,
    budget: int = DEFAULT_BUDGET,
    src: SourceModel | None = None,
) -> np.ndarray:
    """Dense output law P_Y under the given input (and source if conditional)."""
    letter = channel_letter_sizes(ch)
    if isinstance(ch, DmcChannel) and isinstance(inp, IidInput) and letter and len(inp.pmf) == letter[0]:
        q = np.asarray(inp.pmf) @ np.asarray(ch.matrix)
        _, ny = channel_dims(ch, n)
        if ny > budget:
            raise BudgetError(f"output space has {ny} points, budget is {budget}")
        return _kron_power(q, n)
    if isinstance(inp, IidInput):
        x_pmf = input_pmf(inp, ch, n, budget)
    else:
        if src is None:
            raise ValueError("conditional input needs the source to induce an output law")
        p_v = source_pmf(src, n, budget)
        cond = conditional_matrix(inp, src, ch, n, budget)
        x_pmf = p_v @ cond
    xs = np.flatnonzero(x_pmf)
    rows = channel_rows(ch, xs, n, budget)
    return x_pmf[xs] @ rows


# ---------------------------------------------------------------------------
# spectra of models


def _self_information_spectrum(pmf: np.ndarray, n: int) -> Spectrum:
    mask = pmf > 0.0
    return Spectrum.from_outcomes(-np.log(pmf[mask]) / n, pmf[mask], n)


def entropy_spectrum(
    src: SourceModel,
    n: int,
    budget: int = DEFAULT_BUDGET,
    mixed_mode: str = "auto",
) -> Spectrum:
    """Law of (1/n) log 1/P(V block) under the source itself.

    Product sources convolve the per-letter spectrum, so any n is fine.
    Mixtures enumerate exactly within budget; beyond it they fall back
    to the upper sandwich bracket (conservative: shifted up by at most
    max_i (1/n) ln(1/w_i), which vanishes in n). `mixed_mode` forces
    "exact", "sandwich-upper", or "sandwich-lower" behavior.
    """
    if mixed_mode not in ("auto", "exact", "sandwich-upper", "sandwich-lower"):
        raise ValueError(f"unknown mixed_mode {mixed_mode!r}")
    if isinstance(src, IidSource):
        per_letter = _self_information_spectrum(np.asarray(src.pmf), 1)
        return convolve_iid(per_letter, n)
    if isinstance(src, UniformMessageSource):
        return Spectrum.point_mass(math.log(src.size(n)) / n, n)
    if isinstance(src, TableSource):
        return _self_information_spectrum(src.table(n), n)
    if isinstance(src, MixedSource):
        if mixed_mode in ("auto", "exact"):
            try:
                return _self_information_spectrum(source_pmf(src, n, budget), n)
            except BudgetError:
                if mixed_mode == "exact":
                    raise
        parts = [
            (w, entropy_spectrum(s, n, budget=budget, mixed_mode=mixed_mode))
            for w, s in src.components
        ]
        lo, hi = mixture_sandwich(parts, n)
        return lo if mixed_mode == "sandwich-lower" else hi
    raise TypeError(f"not a source model: {src!r}")


def entropy_spectrum_bracket(
    src: MixedSource, n: int, budget: int = DEFAULT_BUDGET
) -> tuple[Spectrum, Spectrum]:
    """Sandwich brackets for a mixed source at blocklength n."""
    parts = [(w, entropy_spectrum(s, n, budget=budget)) for w, s in src.components]
    return mixture_sandwich(parts, n)


def information_spectrum(
    ch: ChannelModel, inp: InputModel, n: int, budget: int = DEFAULT_BUDGET
) -> Spectrum:
    """Law of the normalized information density under an unconditional input.

    The density is (1/n) log W^n(y|x) / P_Y(y) with P_Y induced by the
    input itself. Conditional or encoder inputs couple the density to
    the source and need the joint spectrum instead.
    """
    if not isinstance(inp, IidInput):
        raise ValueError("information_spectrum needs an unconditional input; use the joint spectrum")
    letter = channel_letter_sizes(ch)
    if isinstance(ch, DmcChannel) and letter and len(inp.pmf) == letter[0]:
        mat = np.asarray(ch.matrix)
        p = np.asarray(inp.pmf)
        q = p @ mat
        joint = p[:, None] * mat
        mask = joint > 0.0
        dens = np.log(mat[mask] / np.broadcast_to(q, mat.shape)[mask])
        per_letter = Spectrum.from_outcomes(dens, joint[mask], 1)
        return convolve_iid(per_letter, n)
    x_pmf = input_pmf(inp, ch, n, budget)
    kernel = channel_kernel(ch, n, budget)
    p_y = x_pmf @ kernel
    joint = x_pmf[:, None] * kernel
    mask = joint > 0.0
    dens = (np.log(kernel[mask]) - np.log(np.broadcast_to(p_y, kernel.shape)[mask])) / n
    return Spectrum.from_outcomes(dens, joint[mask], n)


def joint_density_spectrum(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> JointSpectrum:
    """Exact joint law of (channel density A, source statistic B).

    With an unconditional iid input the two coordinates are independent
    and the joint is the product of the marginal spectra. Encoder and
    conditional inputs are enumerated over (v, x, y) triples within
    budget; the output law P_Y is the one the full chain induces.
    """
    if isinstance(inp, IidInput):
        a = information_spectrum(ch, inp, n, budget)
        b = entropy_spectrum(src, n, budget)
        return JointSpectrum.from_independent(a, b)

    p_v = source_pmf(src, n, budget)
    cond = conditional_matrix(inp, src, ch, n, budget)
    nx, ny = channel_dims(ch, n)
    x_pmf = p_v @ cond
    xs = np.flatnonzero(x_pmf)
    nnz = int(np.count_nonzero(cond[np.flatnonzero(p_v)]))
    if max(nnz, len(xs)) * ny > budget:
        raise BudgetError(
            f"joint enumeration needs {max(nnz, len(xs))} x {ny} kernel entries, budget is {budget}"
        )
    rows = channel_rows(ch, xs, n, budget)
    row_of = {int(x): i for i, x in enumerate(xs)}
    p_y = x_pmf[xs] @ rows
    a_parts, b_parts, m_parts = [], [], []
    log_py = np.full(ny, -math.inf)
    np.log(p_y, out=log_py, where=p_y > 0.0)
    for v in np.flatnonzero(p_v):
        b_v = -math.log(p_v[v]) / n
        for x in np.flatnonzero(cond[v]):
            row = rows[row_of[int(x)]]
            mask = row > 0.0
            mass = p_v[v] * cond[v, x] * row[mask]
            dens = (np.log(row[mask]) - log_py[mask]) / n
            a_parts.append(dens)
            b_parts.append(np.full(int(mask.sum()), b_v))
            m_parts.append(mass)
    return JointSpectrum.from_atoms(
        np.concatenate(a_parts), np.concatenate(b_parts), np.concatenate(m_parts), n
    )


# ---------------------------------------------------------------------------
# the average-versus-maximum error gap instance


def avg_max_gap_source(alpha: Union[float, Callable[[int], float]]) -> TableSource:
    """Ternary source (alpha, (1-alpha)/2, (1-alpha)/2), possibly per-n."""

    def pmf(n: int):
        a = float(alpha(n)) if callable(alpha) else float(alpha)
        if not (0.0 < a < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
        return (a, (1.0 - a) / 2.0, (1.0 - a) / 2.0)

    return TableSource(pmfs=pmf)


def avg_max_gap_channel() -> TableChannel:
    """Single-use deterministic channel: inputs {0,1} merge, input 2 separates.

    Outputs are binary; rows are inputs 0, 1, 2. Inputs 0 and 1 both
    produce output 0, so a decoder cannot tell the rare source symbol
    from the symbol sharing its image.
    """
    return TableChannel.constant(((1.0, 0.0), (1.0, 0.0), (0.0, 1.0)))


def avg_max_gap_instance(alpha: Union[float, Callable[[int], float]]):
    """Source, channel, and the reference code for the gap instance.

    The code sends source symbol 0 through input 1 and keeps symbols 1
    and 2 on their own inputs; the decoder inverts the two outputs to
    symbols 1 and 2. Its average block error equals alpha exactly while
    the maximum per-symbol error stays 1: symbol 0 is always lost.
    Sacrificing the rare symbol is also average-optimal whenever
    alpha <= 1/3; past that point dropping one of the heavier symbols
    is cheaper and the optimum becomes (1 - alpha) / 2.
    """
    from .coding import JointCode

    src = avg_max_gap_source(alpha)
    ch = avg_max_gap_channel()
    code = JointCode(
        n=1,
        encoder=np.array([1, 1, 2]),
        decoder=np.array([1, 2]),
        num_channel_inputs=3,
    )
    return src, ch, code


def avg_max_gap_encoder_input() -> EncoderInput:
    """The gap instance's encoder as a per-n input for schedule diagnostics."""
    from .coding import JointCode

    def code(n: int):
        return JointCode(
            n=n,
            encoder=np.array([1, 1, 2]),
            decoder=np.array([1, 2]),
            num_channel_inputs=3,
        )

    return EncoderInput(codes=code)
