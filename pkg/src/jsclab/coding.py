"""Joint source-channel codes and exact error computation.

A JointCode is an encoder array (source outcome -> channel input) plus
a decoder array (channel output -> source outcome), with -1 in the
decoder marking the reserved failure symbol. Failure always counts as
an error. Error probabilities are computed exactly by enumeration, with
compensated summation on the final reductions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .models import (
    DEFAULT_BUDGET,
    BudgetError,
    ChannelModel,
    IidInput,
    InputModel,
    SourceModel,
    channel_dims,
    channel_letter_sizes,
    channel_rows,
    conditional_matrix,
    output_law,
    source_pmf,
)

FAIL = -1

# Encoder assignments the exhaustive search is allowed to visit.
DEFAULT_ORACLE_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class JointCode:
    """Deterministic joint code at one blocklength."""

    n: int
    encoder: np.ndarray
    decoder: np.ndarray
    num_channel_inputs: int

    def __post_init__(self):
        enc = np.asarray(self.encoder, dtype=int)
        dec = np.asarray(self.decoder, dtype=int)
        object.__setattr__(self, "encoder", enc)
        object.__setattr__(self, "decoder", dec)
        if enc.ndim != 1 or dec.ndim != 1:
            raise ValueError("encoder and decoder must be 1-D index arrays")
        if len(enc) == 0 or len(dec) == 0:
            raise ValueError("encoder and decoder must be nonempty")
        if np.any(enc < 0) or np.any(enc >= self.num_channel_inputs):
            raise ValueError("encoder output outside the channel input space")
        if np.any(dec < FAIL) or np.any(dec >= len(enc)):
            raise ValueError("decoder output outside source outcomes and FAIL")
        enc.setflags(write=False)
        dec.setflags(write=False)

    @property
    def num_source_outcomes(self) -> int:
        return len(self.encoder)

    @property
    def num_channel_outputs(self) -> int:
        return len(self.decoder)


def serialize_code(code: JointCode) -> str:
    """Plain-text table form: one line per mapping entry."""
    lines = [
        "jsclab-code v1",
        f"n {code.n}",
        f"inputs {code.num_channel_inputs}",
        f"outputs {code.num_channel_outputs}",
    ]
    for v, x in enumerate(code.encoder):
        lines.append(f"encoder {v} {int(x)}")
    for y, v in enumerate(code.decoder):
        lines.append(f"decoder {y} {'-' if v == FAIL else int(v)}")
    return "\n".join(lines) + "\n"


def parse_code(text: str) -> JointCode:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "jsclab-code v1":
        raise ValueError("not a jsclab-code v1 table")
    header = {}
    body = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] in ("n", "inputs", "outputs"):
            header[parts[0]] = int(parts[1])
        elif parts[0] in ("encoder", "decoder"):
            body.append(parts)
        else:
            raise ValueError(f"unrecognized line: {ln!r}")
    enc_entries = {int(p[1]): int(p[2]) for p in body if p[0] == "encoder"}
    dec_entries = {int(p[1]): (FAIL if p[2] == "-" else int(p[2])) for p in body if p[0] == "decoder"}
    if sorted(enc_entries) != list(range(len(enc_entries))):
        raise ValueError("encoder lines must cover 0..V-1 exactly once")
    # the header count catches duplicate lines that collapse in the dict
    if sorted(dec_entries) != list(range(header.get("outputs", len(dec_entries)))):
        raise ValueError("decoder lines must cover 0..Y-1 exactly once")
    return JointCode(
        n=header["n"],
        encoder=np.array([enc_entries[v] for v in range(len(enc_entries))]),
        decoder=np.array([dec_entries[y] for y in range(len(dec_entries))]),
        num_channel_inputs=header["inputs"],
    )


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """Exact error accounting for one code on one source and channel."""

    average_error: float
    max_error: float
    per_symbol_errors: dict[int, float]

    def __post_init__(self):
        if not (-1e-12 <= self.average_error <= 1.0 + 1e-12):
            raise ValueError(f"average error out of range: {self.average_error}")
        if self.per_symbol_errors:
            worst = max(self.per_symbol_errors.values())
            if abs(worst - self.max_error) > 1e-12:
                raise ValueError("max_error disagrees with per-symbol table")


def exact_error(
    code: JointCode,
    src: SourceModel,
    ch: ChannelModel,
    budget: int = DEFAULT_BUDGET,
) -> ErrorReport:
    """Exact average and maximum block error of a deterministic code.

    Work scales with (distinct codewords) x (output space), not the full
    kernel, so long codes with few codewords stay cheap.
    """
    n = code.n
    p_v = source_pmf(src, n, budget)
    nx, ny = channel_dims(ch, n)
    if len(p_v) != code.num_source_outcomes:
        raise ValueError(
            f"code covers {code.num_source_outcomes} source outcomes, source has {len(p_v)}"
        )
    if ny != code.num_channel_outputs:
        raise ValueError(f"code expects {code.num_channel_outputs} outputs, channel has {ny}")
    support = np.flatnonzero(p_v)
    used = np.unique(code.encoder[support])
    rows = channel_rows(ch, used, n, budget)
    row_of = {int(x): i for i, x in enumerate(used)}
    # success mass reaching each v: sum of W(y|x(v)) over y decoded to v
    per_symbol: dict[int, float] = {}
    for v in support:
        row = rows[row_of[int(code.encoder[v])]]
        ys = np.flatnonzero(code.decoder == v)
        ok = float(math.fsum(row[ys].tolist()))
        per_symbol[int(v)] = min(max(1.0 - ok, 0.0), 1.0)
    average = math.fsum(p_v[v] * per_symbol[int(v)] for v in support)
    worst = max(per_symbol.values())
    return ErrorReport(average_error=average, max_error=worst, per_symbol_errors=per_symbol)


def _log_density(rows: np.ndarray, p_y: np.ndarray, n: int) -> np.ndarray:
    """(1/n) log W(y|x)/P_Y(y) per row entry; -inf where W vanishes."""
    out = np.full(rows.shape, -math.inf)
    log_py = np.full(len(p_y), math.inf)
    np.log(p_y, out=log_py, where=p_y > 0.0)
    np.subtract(np.log(rows, out=np.full(rows.shape, -math.inf), where=rows > 0.0),
                log_py[None, :], out=out, where=rows > 0.0)
    return out / n


def threshold_decoder(
    codebook: np.ndarray,
    src: SourceModel,
    ch: ChannelModel,
    output_input: InputModel,
    gamma: float,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> JointCode:
    """Build the unique-candidate threshold code for a fixed codebook.

    A pair (x, y) is a candidate for outcome v when the normalized
    density against the reference output law (induced by output_input)
    strictly exceeds (1/n) log 1/P(v) + gamma. Outputs with exactly one
    candidate decode to it; anything else decodes to the failure symbol.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    p_v = source_pmf(src, n, budget)
    codebook = np.asarray(codebook, dtype=int)
    if len(codebook) != len(p_v):
        raise ValueError(f"codebook covers {len(codebook)} outcomes, source has {len(p_v)}")
    nx, ny = channel_dims(ch, n)
    p_y = output_law(output_input, ch, n, budget, src=src)
    used = np.unique(codebook)
    if len(used) * ny > budget:
        raise BudgetError(f"decoder table needs {len(used)} x {ny} densities, budget is {budget}")
    dens = _log_density(channel_rows(ch, used, n, budget), p_y, n)
    row_idx = np.searchsorted(used, codebook)
    with np.errstate(invalid="ignore"):
        b = np.full(len(p_v), math.inf)
        np.divide(-np.log(p_v, out=np.full(len(p_v), -math.inf), where=p_v > 0.0), n,
                  out=b, where=p_v > 0.0)
        candidates = dens[row_idx] > (b + gamma)[:, None]
    counts = candidates.sum(axis=0)
    decoder = np.where(counts == 1, np.argmax(candidates, axis=0), FAIL)
    return JointCode(n=n, encoder=codebook, decoder=decoder, num_channel_inputs=nx)


def ensemble_average_error(
    src: SourceModel,
    inp: InputModel,
    ch: ChannelModel,
    gamma: float,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Exact expected error of the random threshold code.

    Codewords are drawn independently per source outcome from P(x|v)
    and decoded with the unique-candidate threshold rule. Independence
    across outcomes factorizes the expectation: conditioned on (v, x, y)
    the other outcomes stay candidates independently, so the success
    probability multiplies (1 - q(v', y)) over v' != v, where q(v', y)
    is the candidate probability of v' at output y. Decode failure
    counts as an error, so this is an upper bound on average-optimal
    decoding of the same random codebook.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    p_v = source_pmf(src, n, budget)
    cond = conditional_matrix(inp, src, ch, n, budget)
    nx, ny = channel_dims(ch, n)
    if nx * ny > budget:
        raise BudgetError(f"ensemble evaluation needs {nx} x {ny} densities, budget is {budget}")
    kernel = channel_rows(ch, range(nx), n, budget=nx * ny)
    p_y = (p_v @ cond) @ kernel
    dens = _log_density(kernel, p_y, n)

    support = np.flatnonzero(p_v)
    b = -np.log(p_v[support]) / n
    # q[i, y] = Pr over the codeword draw that outcome support[i] is a candidate at y
    q = np.empty((len(support), ny))
    hit = np.empty((len(support), ny))
    for i, v in enumerate(support):
        cand = dens > (b[i] + gamma)
        q[i] = cond[v] @ cand
        hit[i] = (cond[v][:, None] * kernel * cand).sum(axis=0)
    success_terms = []
    keep = 1.0 - q
    for i, v in enumerate(support):
        others = np.prod(np.delete(keep, i, axis=0), axis=0) if len(support) > 1 else np.ones(ny)
        success_terms.append(p_v[v] * float(np.dot(hit[i], others)))
    return min(max(1.0 - math.fsum(success_terms), 0.0), 1.0)


def map_decoder(
    encoder: np.ndarray,
    src: SourceModel,
    ch: ChannelModel,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> JointCode:
    """Maximum a posteriori decoder for a fixed encoder.

    Ties break to the smallest source outcome index, which makes the
    construction deterministic.
    """
    p_v = source_pmf(src, n, budget)
    encoder = np.asarray(encoder, dtype=int)
    nx, ny = channel_dims(ch, n)
    if len(p_v) * ny > budget:
        raise BudgetError(f"MAP scoring needs {len(p_v)} x {ny} entries, budget is {budget}")
    used = np.unique(encoder)
    rows = channel_rows(ch, used, n, budget)
    scores = p_v[:, None] * rows[np.searchsorted(used, encoder)]
    decoder = np.argmax(scores, axis=0)
    return JointCode(n=n, encoder=encoder, decoder=decoder, num_channel_inputs=nx)


def brute_force_optimal_error(
    src: SourceModel,
    ch: ChannelModel,
    n: int,
    budget: int = DEFAULT_BUDGET,
    oracle_budget: int = DEFAULT_ORACLE_BUDGET,
) -> tuple[ErrorReport, JointCode]:
    """Exhaustively optimal average error over deterministic codes.

    Every encoder assignment of supported source outcomes to channel
    inputs is scored under its own MAP decoder; the first assignment in
    lexicographic order attaining the optimum is returned. The MAP
    identity 1 - sum_y max_v P(v) W(y|x(v)) makes each assignment O(VY).
    """
    p_v = source_pmf(src, n, budget)
    nx, ny = channel_dims(ch, n)
    support = np.flatnonzero(p_v)
    k = len(support)
    total = nx**k
    if total > oracle_budget:
        raise BudgetError(f"{total} encoder assignments exceed the oracle budget {oracle_budget}")
    if k * nx * ny > budget:
        raise BudgetError(f"oracle scoring needs {k} x {nx} x {ny} entries, budget is {budget}")
    kernel = channel_rows(ch, range(nx), n, budget=nx * ny)
    weighted = p_v[support][:, None, None] * kernel[None, :, :]
    best_score = -1.0
    best = None
    for assign in itertools.product(range(nx), repeat=k):
        rows = weighted[np.arange(k), assign, :]
        score = float(rows.max(axis=0).sum())
        if score > best_score + 1e-15:
            best_score = score
            best = assign
    encoder = np.zeros(len(p_v), dtype=int)
    encoder[support] = best
    code = map_decoder(encoder, src, ch, n, budget)
    report = exact_error(code, src, ch, budget)
    return report, code


def sample_codebook(
    rng: np.random.Generator,
    inp: IidInput,
    ch: ChannelModel,
    count: int,
    n: int,
) -> np.ndarray:
    """Draw `count` independent block codewords from a product input law."""
    letter = channel_letter_sizes(ch)
    pmf = np.asarray(inp.pmf)
    if letter is not None and len(pmf) == letter[0]:
        kx = letter[0]
        letters = rng.choice(kx, size=(count, n), p=pmf)
        weights = kx ** np.arange(n - 1, -1, -1)
        return letters @ weights
    nx, _ = channel_dims(ch, n)
    if len(pmf) != nx:
        raise ValueError(f"input pmf length {len(pmf)} does not match input space {nx}")
    return rng.choice(nx, size=count, p=pmf)


def two_step_code(
    src: SourceModel,
    ch: ChannelModel,
    channel_input: IidInput,
    c: float,
    gamma: float,
    n: int,
    budget: int = DEFAULT_BUDGET,
    num_codebooks: int = 16,
    seed: int = 0,
) -> tuple[JointCode, ErrorReport]:
    """Separated code: fixed-rate source stage, threshold channel stage.

    The source stage keeps the ceil(e^(c n)) most probable outcomes
    (ties to the smaller index) and assigns them message ranks; dropped
    outcomes ride on message 0 and always decode wrongly. When the rate
    covers the whole support the stage is lossless and only the channel
    stage contributes errors. The channel stage sends messages with a
    threshold-decoder code over a codebook drawn from channel_input;
    `num_codebooks` seeded draws are evaluated exactly and the best one
    is kept, which keeps the construction deterministic.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if num_codebooks < 1:
        raise ValueError("need at least one codebook draw")
    p_v = source_pmf(src, n, budget)
    nx, ny = channel_dims(ch, n)
    m_req = math.ceil(math.exp(c * n))
    kept = np.argsort(-p_v, kind="stable")[: min(m_req, len(p_v))]
    m = len(kept)
    rank = np.full(len(p_v), 0, dtype=int)
    rank[kept] = np.arange(m)

    # channel stage threshold: uniform messages at rate (1/n) ln m
    b_msg = math.log(m) / n if m > 1 else 0.0
    p_y = output_law(channel_input, ch, n, budget)
    rng = np.random.default_rng(seed)
    best: tuple[float, JointCode, ErrorReport] | None = None
    for _ in range(num_codebooks):
        codewords = sample_codebook(rng, channel_input, ch, m, n)
        used = np.unique(codewords)
        if len(used) * ny > budget:
            raise BudgetError(
                f"channel stage needs {len(used)} x {ny} densities, budget is {budget}"
            )
        dens = _log_density(channel_rows(ch, used, n, budget), p_y, n)
        cand = dens[np.searchsorted(used, codewords)] > b_msg + gamma
        counts = cand.sum(axis=0)
        msg_decoder = np.where(counts == 1, np.argmax(cand, axis=0), FAIL)
        decoder = np.where(msg_decoder == FAIL, FAIL, kept[msg_decoder])
        code = JointCode(
            n=n,
            encoder=codewords[rank],
            decoder=decoder,
            num_channel_inputs=nx,
        )
        report = exact_error(code, src, ch, budget)
        if best is None or report.average_error < best[0] - 1e-15:
            best = (report.average_error, code, report)
    return best[1], best[2]
