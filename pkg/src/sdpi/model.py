"""Distributions, channels and the channel file format.

Alphabets are the index sets ``0..n-1``.  A channel is a row-stochastic
matrix whose row ``x`` is the output law given input ``x``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9
EQUAL_TOL = 1e-12


class ChannelError(ValueError):
    """Raised for malformed or invalid distributions and channel files."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Distribution:
    """Probability vector over ``range(len(probs))``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size == 0:
            raise ChannelError("distribution must be a non-empty vector")
        if not np.all(np.isfinite(p)):
            raise ChannelError("distribution has non-finite entries")
        if np.any(p < 0):
            raise ChannelError("distribution has a negative entry")
        if abs(math.fsum(p) - 1.0) > ROW_SUM_TOL:
            raise ChannelError(f"distribution sums to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix ``W[x, y] = P(Y=y | X=x)``."""

    matrix: np.ndarray
    name: Optional[str] = None
    rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        W = _frozen(self.matrix)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise ChannelError("channel must be a non-empty 2-D matrix")
        object.__setattr__(self, "matrix", W)
        object.__setattr__(self, "rows", tuple(Distribution(r) for r in W))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], name: Optional[str] = None,
                  normalize: bool = False) -> "Channel":
        lengths = {len(r) for r in rows}
        if len(rows) == 0:
            raise ChannelError("channel needs at least one row")
        if len(lengths) != 1:
            raise ChannelError("ragged rows: row lengths differ")
        W = np.array(rows, dtype=float)
        if not np.all(np.isfinite(W)):
            raise ChannelError("channel has non-finite entries")
        if np.any(W < 0):
            raise ChannelError("channel has a negative entry")
        if normalize:
            sums = W.sum(axis=1, keepdims=True)
            if np.any(sums <= 0):
                raise ChannelError("cannot normalize a row with zero sum")
            W = W / sums
        return cls(W, name)

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.name, self.matrix.tobytes(), self.matrix.shape))

    def push(self, P) -> np.ndarray:
        """Output law(s) ``P @ W``; ``P`` may be a batch along the first axis."""
        return np.asarray(P, dtype=float) @ self.matrix


def bsc(delta: float) -> Channel:
    return Channel(np.array([[1 - delta, delta], [delta, 1 - delta]]), f"BSC({delta})")


def bec(eps: float) -> Channel:
    return Channel(np.array([[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]]), f"BEC({eps})")


def random_channel(rng: np.random.Generator, n_in: int, n_out: int) -> Channel:
    """Rows drawn from the flat measure on the output simplex."""
    return Channel(rng.dirichlet(np.ones(n_out), size=n_in))


def parse_channel(text: str, normalize: bool = False) -> Channel:
    """Parse the JSON channel format ``{"rows": [[...], ...], "name": "..."}``."""
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ChannelError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ChannelError("channel file must hold a JSON object")
    extra = set(obj) - {"rows", "name"}
    if extra:
        raise ChannelError(f"unexpected keys: {sorted(extra)}")
    if "rows" not in obj:
        raise ChannelError('missing required key "rows"')
    rows = obj["rows"]
    name = obj.get("name")
    if name is not None and not isinstance(name, str):
        raise ChannelError('"name" must be a string')
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ChannelError('"rows" must be an array of arrays')
    for r in rows:
        for v in r:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ChannelError(f"non-numeric entry {v!r}")
    return Channel.from_rows(rows, name=name, normalize=normalize)


def _reject_constant(token):
    raise ChannelError(f"non-finite number {token} in channel file")


def dump_channel(channel: Channel) -> str:
    obj = {"rows": channel.matrix.tolist()}
    if channel.name is not None:
        obj["name"] = channel.name
    return json.dumps(obj)


def validate_pair(P: Distribution, Q: Distribution, channel: Channel, kind=None) -> bool:
    """True iff ``0 < D_f(P||Q) < inf`` is guaranteed for the given kind.

    ``kind=None`` uses the strictest rule (support violations are infinite),
    which is the KL convention.
    """
    P = P if isinstance(P, Distribution) else Distribution(P)
    Q = Q if isinstance(Q, Distribution) else Distribution(Q)
    if len(P) != channel.input_size or len(Q) != channel.input_size:
        raise ChannelError("distribution length does not match channel input size")
    if np.all(np.abs(P.probs - Q.probs) <= EQUAL_TOL):
        return False
    from sdpi.divergence import DivergenceKind

    kind = DivergenceKind.KL if kind is None else DivergenceKind.parse(kind)
    if math.isinf(kind.slope_at_infinity):
        return bool(np.all(Q.probs[P.probs > 0] > 0))
    return True
