"""Scenario files: JSON descriptions of models, grids and schedules.

A scenario is a plain JSON object. Section by section it names a
source, a channel, inputs, an optional explicit code, a blocklength
grid and the threshold/slack schedules. Subcommands read only the
sections they need and reject scenarios that lack them, so one file
can serve several commands.

Every validation error is raised as ScenarioError with the JSON path
of the offending field, e.g. "source.pmf[2]: must be positive".
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .bounds import GammaSchedule
from .coding import JointCode
from .models import (
    ChannelModel,
    DmcChannel,
    EncoderInput,
    IidInput,
    IidSource,
    InputModel,
    MixedSource,
    SourceModel,
    UniformMessageSource,
    avg_max_gap_channel,
    avg_max_gap_encoder_input,
    avg_max_gap_source,
    bsc,
    noiseless_channel,
)

SCHEMA_VERSION = 1

SOURCE_FAMILIES = ("iid", "uniform_messages", "mixed", "ternary_gap")
CHANNEL_FAMILIES = ("dmc", "bsc", "noiseless", "ternary_gap")
INPUT_FAMILIES = ("iid", "ternary_gap_encoder")
C_KINDS = ("constant", "explicit")


class ScenarioError(ValueError):
    """A scenario file is malformed or missing a required section."""


def _fail(path: str, msg: str):
    raise ScenarioError(f"{path}: {msg}")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        _fail(path, f"missing required field {key!r}")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        _fail(path, "must be finite")
    return float(value)


def _positive_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    if value < 1:
        _fail(path, "must be >= 1")
    return value


def _pmf(value, path: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) < 1:
        _fail(path, "expected a non-empty list of probabilities")
    out = []
    for i, x in enumerate(value):
        p = _number(x, f"{path}[{i}]")
        if p < 0.0:
            _fail(f"{path}[{i}]", "must be nonnegative")
        out.append(p)
    if abs(math.fsum(out) - 1.0) > 1e-9:
        _fail(path, f"must sum to 1, got {math.fsum(out)!r}")
    return tuple(out)


def _family(obj, path: str, allowed) -> str:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    fam = _require(obj, "family", path)
    if fam not in allowed:
        _fail(f"{path}.family", f"unknown family {fam!r}, expected one of {allowed}")
    return fam


def _gap_alpha(value, path: str):
    if value == "one_over_n":
        return lambda n: 1.0 / n
    a = _number(value, path)
    if not (0.0 < a < 1.0):
        _fail(path, "must lie in (0, 1) or be the string 'one_over_n'")
    return a


def build_source(obj: Any, path: str = "source") -> SourceModel:
    fam = _family(obj, path, SOURCE_FAMILIES)
    if fam == "iid":
        return IidSource(pmf=_pmf(_require(obj, "pmf", path), f"{path}.pmf"))
    if fam == "uniform_messages":
        rate = _number(_require(obj, "rate", path), f"{path}.rate")
        if rate <= 0.0:
            _fail(f"{path}.rate", "must be positive")
        return UniformMessageSource.at_rate(rate)
    if fam == "mixed":
        comps = _require(obj, "components", path)
        if not isinstance(comps, list) or len(comps) < 2:
            _fail(f"{path}.components", "expected a list of at least 2 components")
        built = []
        for i, comp in enumerate(comps):
            cpath = f"{path}.components[{i}]"
            if not isinstance(comp, dict):
                _fail(cpath, "expected an object")
            w = _number(_require(comp, "weight", cpath), f"{cpath}.weight")
            built.append((w, build_source(_require(comp, "source", cpath), f"{cpath}.source")))
        try:
            return MixedSource(components=tuple(built))
        except ValueError as e:
            _fail(f"{path}.components", str(e))
    if fam == "ternary_gap":
        return avg_max_gap_source(_gap_alpha(obj.get("alpha", "one_over_n"), f"{path}.alpha"))
    raise AssertionError(fam)


def build_channel(obj: Any, path: str = "channel") -> ChannelModel:
    fam = _family(obj, path, CHANNEL_FAMILIES)
    if fam == "bsc":
        p = _number(_require(obj, "p", path), f"{path}.p")
        if not (0.0 <= p <= 1.0):
            _fail(f"{path}.p", "must lie in [0, 1]")
        return bsc(p)
    if fam == "noiseless":
        return noiseless_channel(_positive_int(_require(obj, "size", path), f"{path}.size"))
    if fam == "dmc":
        rows = _require(obj, "matrix", path)
        if not isinstance(rows, list) or not rows:
            _fail(f"{path}.matrix", "expected a non-empty list of rows")
        matrix = tuple(_pmf(row, f"{path}.matrix[{i}]") for i, row in enumerate(rows))
        widths = {len(r) for r in matrix}
        if len(widths) != 1:
            _fail(f"{path}.matrix", "rows must share one length")
        return DmcChannel(matrix=matrix)
    if fam == "ternary_gap":
        return avg_max_gap_channel()
    raise AssertionError(fam)


def build_input(obj: Any, path: str = "input") -> InputModel:
    fam = _family(obj, path, INPUT_FAMILIES)
    if fam == "iid":
        return IidInput(pmf=_pmf(_require(obj, "pmf", path), f"{path}.pmf"))
    if fam == "ternary_gap_encoder":
        return avg_max_gap_encoder_input()
    raise AssertionError(fam)


def build_code(obj: Any, path: str = "code") -> JointCode:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    n = _positive_int(_require(obj, "n", path), f"{path}.n")
    nx = _positive_int(_require(obj, "num_channel_inputs", path), f"{path}.num_channel_inputs")
    enc = _require(obj, "encoder", path)
    dec = _require(obj, "decoder", path)
    for name, seq in (("encoder", enc), ("decoder", dec)):
        if not isinstance(seq, list) or not seq:
            _fail(f"{path}.{name}", "expected a non-empty list of integers")
        for i, x in enumerate(seq):
            if isinstance(x, bool) or not isinstance(x, int):
                _fail(f"{path}.{name}[{i}]", "expected an integer")
    try:
        return JointCode(n=n, encoder=enc, decoder=dec, num_channel_inputs=nx)
    except ValueError as e:
        _fail(path, str(e))


def build_gamma(obj: Any, path: str = "gamma") -> GammaSchedule:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        value = _number(obj, path)
        if value <= 0.0:
            _fail(path, "constant slack must be positive")
        return GammaSchedule.constant(value)
    if not isinstance(obj, dict):
        _fail(path, "expected a number or an object")
    kind = _require(obj, "kind", path)
    try:
        if kind == "power":
            return GammaSchedule.power(
                c=_number(obj.get("c", 1.0), f"{path}.c"),
                p=_number(obj.get("p", 0.5), f"{path}.p"),
            )
        if kind == "constant":
            return GammaSchedule.constant(_number(_require(obj, "value", path), f"{path}.value"))
        if kind == "explicit":
            vals = _require(obj, "values", path)
            if not isinstance(vals, list) or not vals:
                _fail(f"{path}.values", "expected a non-empty list")
            return GammaSchedule.explicit([_number(v, f"{path}.values[{i}]") for i, v in enumerate(vals)])
    except ScenarioError:
        raise
    except ValueError as e:
        _fail(path, str(e))
    _fail(f"{path}.kind", f"unknown kind {kind!r}, expected power, constant or explicit")


def build_c_schedule(obj: Any, path: str = "c") -> Callable[[int], float]:
    """Threshold-rate family c_n for the domination checks."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        value = _number(obj, path)
        return lambda n: value
    if not isinstance(obj, dict):
        _fail(path, "expected a number or an object")
    kind = _require(obj, "kind", path)
    if kind not in C_KINDS:
        _fail(f"{path}.kind", f"unknown kind {kind!r}, expected one of {C_KINDS}")
    if kind == "constant":
        value = _number(_require(obj, "value", path), f"{path}.value")
        return lambda n: value
    table = _require(obj, "values", path)
    if not isinstance(table, dict) or not table:
        _fail(f"{path}.values", "expected an object mapping n to c_n")
    parsed = {}
    for key, val in table.items():
        try:
            n = int(key)
        except ValueError:
            _fail(f"{path}.values", f"key {key!r} is not a blocklength")
        parsed[n] = _number(val, f"{path}.values[{key}]")

    def at(n: int) -> float:
        if n not in parsed:
            raise ScenarioError(f"{path}.values: no threshold listed for n = {n}")
        return parsed[n]

    return at


def _n_grid(obj, path: str) -> tuple[int, ...]:
    if not isinstance(obj, list) or len(obj) < 1:
        _fail(path, "expected a non-empty list of blocklengths")
    grid = tuple(_positive_int(x, f"{path}[{i}]") for i, x in enumerate(obj))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        _fail(path, "must be strictly increasing")
    return grid


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario plus its canonical content hash."""

    name: str
    raw: dict
    digest: str
    source: Optional[SourceModel] = None
    channel: Optional[ChannelModel] = None
    designated_input: Optional[InputModel] = None
    candidate_inputs: tuple[IidInput, ...] = ()
    code: Optional[JointCode] = None
    n_grid: Optional[tuple[int, ...]] = None
    gamma: Optional[GammaSchedule] = None
    c_schedule: Optional[Callable[[int], float]] = None
    eps: Optional[float] = None
    budget: Optional[int] = None
    seed: Optional[int] = None

    def require(self, attr: str):
        value = getattr(self, attr)
        if value is None or (attr == "candidate_inputs" and not value):
            raise ScenarioError(
                f"scenario {self.name!r} has no {attr.replace('_', ' ')} section, "
                "which this command needs"
            )
        return value


def canonical_digest(raw: dict) -> str:
    """sha256 over the canonical JSON form (sorted keys, tight separators)."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode("ascii")).hexdigest()


def parse_scenario(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("top level: expected a JSON object")
    version = _require(raw, "version", "top level")
    if version != SCHEMA_VERSION:
        _fail("version", f"unsupported schema version {version!r}, expected {SCHEMA_VERSION}")
    name = _require(raw, "name", "top level")
    if not isinstance(name, str) or not name:
        _fail("name", "expected a non-empty string")
    if not all(c.isalnum() or c in "_-" for c in name):
        _fail("name", "use only letters, digits, '_' and '-'")
    known = {
        "version", "name", "description", "source", "channel", "input",
        "candidate_inputs", "code", "n_grid", "gamma", "c", "eps",
        "budget", "seed",
    }
    for key in raw:
        if key not in known:
            _fail(key, "unknown field")

    candidates: tuple[IidInput, ...] = ()
    if "candidate_inputs" in raw:
        lst = raw["candidate_inputs"]
        if not isinstance(lst, list) or not lst:
            _fail("candidate_inputs", "expected a non-empty list")
        built_inputs = []
        for i, x in enumerate(lst):
            cand = build_input(x, f"candidate_inputs[{i}]")
            if not isinstance(cand, IidInput):
                _fail(f"candidate_inputs[{i}]", "capacity candidates must be iid inputs")
            built_inputs.append(cand)
        candidates = tuple(built_inputs)
        labels = [c.label for c in candidates]
        if len(set(labels)) != len(labels):
            _fail("candidate_inputs", "inputs must be distinct")

    eps = None
    if "eps" in raw:
        eps = _number(raw["eps"], "eps")
        if not (0.0 < eps < 0.5):
            _fail("eps", "must lie in (0, 0.5)")
    budget = _positive_int(raw["budget"], "budget") if "budget" in raw else None
    seed = None
    if "seed" in raw:
        if isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int) or raw["seed"] < 0:
            _fail("seed", "expected a nonnegative integer")
        seed = raw["seed"]

    return Scenario(
        name=name,
        raw=raw,
        digest=canonical_digest(raw),
        source=build_source(raw["source"]) if "source" in raw else None,
        channel=build_channel(raw["channel"]) if "channel" in raw else None,
        designated_input=build_input(raw["input"], "input") if "input" in raw else None,
        candidate_inputs=candidates,
        code=build_code(raw["code"]) if "code" in raw else None,
        n_grid=_n_grid(raw["n_grid"], "n_grid") if "n_grid" in raw else None,
        gamma=build_gamma(raw["gamma"]) if "gamma" in raw else None,
        c_schedule=build_c_schedule(raw["c"]) if "c" in raw else None,
        eps=eps,
        budget=budget,
        seed=seed,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path} is not valid JSON: {e}") from e
    return parse_scenario(raw)
