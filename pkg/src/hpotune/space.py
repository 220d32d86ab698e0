"""Mixed hyperparameter search spaces.

A :class:`SearchSpace` is an ordered list of named domains. Configurations are
plain ``dict`` objects keyed by parameter name, in space order. Population
strategies work on a real-vector encoding with one component per parameter:

* categorical and explicit value lists encode as the ordinal index,
* integer ranges encode as the integer itself,
* continuous ranges encode as the raw value (also for log-uniform sampling).

``decode`` clips every component into its box and rounds discrete components
half away from zero, so any real vector decodes to a valid configuration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateName,
    EmptyCategorical,
    InvertedRange,
    LogUniformNonPositive,
    NonFiniteDomain,
    TuneError,
)
from .rng import SeededRandomStream, as_stream

Configuration = dict


@dataclass(frozen=True)
class Categorical:
    values: tuple

    def __init__(self, values: Iterable[str]):
        object.__setattr__(self, "values", tuple(values))

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Values:
    """An explicit finite list of numeric values (grid axes)."""

    values: tuple

    def __init__(self, values: Iterable[float]):
        object.__setattr__(self, "values", tuple(values))

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class IntegerRange:
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class ContinuousRange:
    lo: float
    hi: float
    log: bool = False


ParamDomain = Categorical | Values | IntegerRange | ContinuousRange


def round_half_away(x):
    """Round to nearest integer, ties away from zero (``np.round`` rounds to even)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _check_domain(name: str, domain: ParamDomain) -> None:
    if isinstance(domain, (Categorical, Values)):
        if not domain.values:
            raise EmptyCategorical(f"parameter {name!r} has an empty value list")
        if len(set(domain.values)) != len(domain.values):
            raise DuplicateName(f"parameter {name!r} lists a value more than once")
    elif isinstance(domain, IntegerRange):
        if domain.lo > domain.hi:
            raise InvertedRange(f"parameter {name!r}: lo={domain.lo} > hi={domain.hi}")
    elif isinstance(domain, ContinuousRange):
        if not (math.isfinite(domain.lo) and math.isfinite(domain.hi)):
            raise InvertedRange(f"parameter {name!r}: bounds must be finite")
        if domain.lo > domain.hi:
            raise InvertedRange(f"parameter {name!r}: lo={domain.lo} > hi={domain.hi}")
        if domain.log and domain.lo <= 0:
            raise LogUniformNonPositive(f"parameter {name!r}: log-uniform needs lo > 0")
    else:
        raise TuneError(f"parameter {name!r}: unsupported domain {domain!r}")


def validate(space: SearchSpace) -> None:
    """Raise the matching :class:`~hpotune.errors.TuneError` if ``space`` is malformed."""
    seen = set()
    for name, domain in space.params:
        if not isinstance(name, str) or not name:
            raise DuplicateName("parameter names must be non-empty strings")
        if name in seen:
            raise DuplicateName(f"parameter {name!r} declared twice")
        seen.add(name)
        _check_domain(name, domain)


class SearchSpace:
    """Ordered collection of ``(name, domain)`` pairs. Validated on construction."""

    def __init__(self, params: Sequence[tuple[str, ParamDomain]]):
        self.params = tuple((name, dom) for name, dom in params)
        validate(self)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.params]

    @property
    def dim(self) -> int:
        return len(self.params)

    def __len__(self) -> int:
        return len(self.params)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SearchSpace) and self.params == other.params

    def __hash__(self) -> int:
        return hash(self.params)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={d!r}" for n, d in self.params)
        return f"SearchSpace({inner})"

    @property
    def is_finite(self) -> bool:
        return not any(isinstance(d, ContinuousRange) for _, d in self.params)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper bounds of the encoded box."""
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        for i, (_, d) in enumerate(self.params):
            if isinstance(d, (Categorical, Values)):
                lo[i], hi[i] = 0.0, d.size - 1.0
            else:
                lo[i], hi[i] = float(d.lo), float(d.hi)
        return lo, hi

    def key(self, config: Configuration) -> tuple:
        """Hashable form of a configuration."""
        return tuple(config[n] for n in self.names)

    def contains(self, config: Configuration) -> bool:
        if set(config) != set(self.names):
            return False
        for name, d in self.params:
            v = config[name]
            if isinstance(d, (Categorical, Values)):
                if v not in d.values:
                    return False
            elif isinstance(d, IntegerRange):
                if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not d.lo <= v <= d.hi:
                    return False
            elif not (isinstance(v, (int, float, np.number)) and d.lo <= v <= d.hi):
                return False
        return True

    # config-file representation
    @classmethod
    def from_dicts(cls, entries: Sequence[dict]) -> SearchSpace:
        params = []
        for e in entries:
            kind = e.get("kind")
            name = e.get("name")
            if kind == "categorical":
                dom = Categorical(str(v) for v in e["values"])
            elif kind == "values":
                dom = Values(e["values"])
            elif kind == "int":
                dom = IntegerRange(int(e["low"]), int(e["high"]))
            elif kind == "float":
                dom = ContinuousRange(float(e["low"]), float(e["high"]), bool(e.get("log", False)))
            else:
                raise TuneError(f"parameter {name!r}: unknown kind {kind!r}")
            params.append((name, dom))
        return cls(params)

    def to_dicts(self) -> list[dict]:
        out = []
        for name, d in self.params:
            if isinstance(d, Categorical):
                out.append({"name": name, "kind": "categorical", "values": list(d.values)})
            elif isinstance(d, Values):
                out.append({"name": name, "kind": "values", "values": list(d.values)})
            elif isinstance(d, IntegerRange):
                out.append({"name": name, "kind": "int", "low": d.lo, "high": d.hi})
            else:
                out.append({"name": name, "kind": "float", "low": d.lo, "high": d.hi, "log": d.log})
        return out


def sample_value(domain: ParamDomain, rng: SeededRandomStream) -> Any:
    """One independent draw from a single domain."""
    g = rng.generator
    if isinstance(domain, (Categorical, Values)):
        return domain.values[int(g.integers(domain.size))]
    if isinstance(domain, IntegerRange):
        return int(g.integers(domain.lo, domain.hi + 1))
    if domain.log:
        x = math.exp(g.uniform(math.log(domain.lo), math.log(domain.hi)))
    else:
        x = domain.lo + (domain.hi - domain.lo) * g.random()
    # exp/log and the affine map can overshoot a bound by an ulp
    return float(min(max(x, domain.lo), domain.hi))


def sample(space: SearchSpace, rng: SeededRandomStream | int) -> Configuration:
    rng = as_stream(rng)
    return {name: sample_value(d, rng) for name, d in space.params}


def enumerate_grid(space: SearchSpace) -> list[Configuration]:
    """Full cartesian product; the first parameter varies slowest."""
    axes = []
    for name, d in space.params:
        if isinstance(d, ContinuousRange):
            raise NonFiniteDomain(f"parameter {name!r} is a continuous range and cannot be enumerated")
        if isinstance(d, IntegerRange):
            axes.append(range(d.lo, d.hi + 1))
        else:
            axes.append(d.values)
    names = space.names
    return [dict(zip(names, combo)) for combo in itertools.product(*axes)]


def encode_value(domain: ParamDomain, value: Any) -> float:
    if isinstance(domain, (Categorical, Values)):
        return float(domain.values.index(value))
    return float(value)


def decode_value(domain: ParamDomain, x: float) -> Any:
    if isinstance(domain, (Categorical, Values)):
        idx = int(round_half_away(min(max(x, 0.0), domain.size - 1.0)))
        return domain.values[idx]
    if isinstance(domain, IntegerRange):
        return int(round_half_away(min(max(x, domain.lo), domain.hi)))
    return float(min(max(x, domain.lo), domain.hi))


def encode(space: SearchSpace, config: Configuration) -> np.ndarray:
    if set(config) != set(space.names):
        raise DimensionMismatch(f"configuration keys {sorted(config)} do not match {space.names}")
    return np.array([encode_value(d, config[n]) for n, d in space.params], dtype=float)


def decode(space: SearchSpace, v) -> Configuration:
    v = np.asarray(v, dtype=float)
    if v.shape != (space.dim,):
        raise DimensionMismatch(f"expected vector of length {space.dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise TuneError("vector contains non-finite components")
    return {n: decode_value(d, float(x)) for (n, d), x in zip(space.params, v)}


def sample_encoded(space: SearchSpace, rng: SeededRandomStream | int, n: int) -> np.ndarray:
    """``n`` samples drawn like :func:`sample`, returned already encoded (shape ``(n, dim)``)."""
    g = as_stream(rng).generator
    out = np.empty((n, space.dim))
    for j, (_, d) in enumerate(space.params):
        if isinstance(d, (Categorical, Values)):
            out[:, j] = g.integers(d.size, size=n)
        elif isinstance(d, IntegerRange):
            out[:, j] = g.integers(d.lo, d.hi + 1, size=n)
        elif d.log:
            out[:, j] = np.clip(np.exp(g.uniform(math.log(d.lo), math.log(d.hi), size=n)), d.lo, d.hi)
        else:
            out[:, j] = np.clip(d.lo + (d.hi - d.lo) * g.random(n), d.lo, d.hi)
    return out
