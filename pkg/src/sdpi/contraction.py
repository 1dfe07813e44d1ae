"""Channel-level contraction coefficients.

The coefficient of a full channel is the largest binary-subchannel
coefficient over all unordered pairs of rows, so everything here reduces to
:func:`sdpi.binary_solver.solve_binary` on pairs of rows.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit

from sdpi._parallel import pmap
from sdpi.binary_solver import DEFAULT_CONFIG, BinaryProblem, BinarySolution, SolverConfig, solve_binary
from sdpi.divergence import DivergenceKind, df, df_binary, df_from_diff
from sdpi.model import Channel

PER_PAIR_LIMIT = 64


def g_bound(t):
    """``g(t) = 2t(1 - t/2)``."""
    return 2.0 * t * (1.0 - t / 2.0)


@dataclass
class ContractionResult:
    eta: float
    kind: DivergenceKind
    best_pair: tuple
    arg: BinarySolution
    lower_bound_hellinger: Optional[float] = None
    upper_bound_g: Optional[float] = None
    upper_bound_diam: Optional[float] = None
    per_pair_etas: Optional[dict] = None
    evaluations: int = 0
    budget_exhausted: bool = False
    anomaly: bool = False
    max_ratio_seen: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "eta": self.eta,
            "kind": self.kind.value,
            "best_pair": list(self.best_pair),
            "arg": self.arg.to_dict(),
            "lower_bound_hellinger": self.lower_bound_hellinger,
            "upper_bound_g": self.upper_bound_g,
            "upper_bound_diam": self.upper_bound_diam,
            "diagnostics": {
                "evaluations": self.evaluations,
                "budget_exhausted": self.budget_exhausted,
                "anomaly": self.anomaly,
                "max_ratio_seen": self.max_ratio_seen,
            },
        }
        if self.per_pair_etas is not None:
            out["per_pair_etas"] = [[x, y, v] for (x, y), v in self.per_pair_etas.items()]
        return out


def _row_pairs(n):
    return list(itertools.combinations(range(n), 2))


def _zero_solution() -> BinarySolution:
    return BinarySolution(eta=0.0, arg_p=1.0, arg_q=0.0, on_diagonal=False, evaluations=0,
                          achieved_tol=0.0, round_best=[0.0])


def eta_f(channel: Channel, kind="kl", tol: float = 1e-6, *, threads=1,
          config: SolverConfig = DEFAULT_CONFIG, budget: int | None = None,
          keep_pairs: bool | None = None) -> ContractionResult:
    """Contraction coefficient of ``channel`` for the chosen f-divergence.

    A channel with a single input letter has no admissible pair and gets 0.
    ``keep_pairs`` defaults to keeping the per-pair table for up to 64 inputs.
    """
    kind = DivergenceKind.parse(kind)
    W = channel.matrix
    pairs = _row_pairs(channel.input_size)

    def solve(pair):
        x, y = pair
        if np.array_equal(W[x], W[y]):
            return _zero_solution()
        return solve_binary(BinaryProblem(W[x], W[y], kind), tol=tol, budget=budget, config=config)

    solutions = pmap(solve, pairs, threads)
    best_pair, best = (0, 0), _zero_solution()
    if pairs:
        best_pair, best = pairs[0], solutions[0]
    for pair, sol in zip(pairs, solutions):
        if sol.eta > best.eta:
            best_pair, best = pair, sol

    if keep_pairs is None:
        keep_pairs = channel.input_size <= PER_PAIR_LIMIT
    result = ContractionResult(
        eta=best.eta, kind=kind, best_pair=tuple(int(i) for i in best_pair), arg=best,
        per_pair_etas={p: s.eta for p, s in zip(pairs, solutions)} if keep_pairs else None,
        evaluations=sum(s.evaluations for s in solutions),
        budget_exhausted=any(s.budget_exhausted for s in solutions),
        anomaly=any(s.anomaly for s in solutions),
        max_ratio_seen=max([s.max_ratio_seen for s in solutions], default=0.0),
    )
    if kind is DivergenceKind.KL:
        lo, up_g, up_d = sandwich_bounds(channel)
        result.lower_bound_hellinger = lo
        result.upper_bound_g = up_g
        result.upper_bound_diam = up_d
    return result


def hellinger_diameter(channel: Channel) -> float:
    """Largest squared Hellinger distance between two rows."""
    W = channel.matrix
    return max((df(DivergenceKind.HELLINGER2, W[x], W[y]) for x, y in _row_pairs(channel.input_size)),
               default=0.0)


def sandwich_bounds(channel: Channel) -> tuple:
    """``(d/2, g(d/2), d)`` for the Hellinger diameter ``d``; brackets the KL coefficient."""
    d = hellinger_diameter(channel)
    return d / 2.0, g_bound(d / 2.0), d


@dataclass(frozen=True)
class EnvelopeGrid:
    """Binary weights sampled per row pair.

    ``points`` weights are spaced uniformly in logit over ``[-logit_range, logit_range]``
    (plus 0 and 1 where admissible); ``offsets`` add near-diagonal pairs
    ``p = q + t q(1-q)`` that resolve the slope at the origin.
    """

    points: int = 256
    logit_range: float = 9.0
    offsets: tuple = (-1e-2, -1e-3, -1e-4, 1e-4, 1e-3, 1e-2)


@dataclass
class EnvelopeCurve:
    vertices: np.ndarray
    kind: DivergenceKind
    window_max: float
    cloud_size: int = 0

    @property
    def d_in(self):
        return self.vertices[:, 0]

    @property
    def d_out(self):
        return self.vertices[:, 1]

    def __call__(self, x):
        """Piecewise-linear interpolation; ``nan`` beyond the last vertex."""
        x = np.asarray(x, dtype=float)
        y = np.interp(x, self.d_in, self.d_out)
        return np.where((x >= 0) & (x <= self.d_in[-1]), y, np.nan)

    def max_chord_slope(self) -> float:
        v = self.vertices[1:]
        if v.size == 0:
            return 0.0
        return float(np.max(v[:, 1] / v[:, 0]))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "window_max": self.window_max,
                "vertices": self.vertices.tolist()}


def upper_hull(points: np.ndarray) -> np.ndarray:
    """Upper concave boundary of a 2-D point cloud, left to right."""
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((-pts[:, 1], pts[:, 0]))
    pts = pts[order]
    # duplicate abscissae: keep the highest point (first after the sort)
    first = np.ones(len(pts), dtype=bool)
    first[1:] = pts[1:, 0] != pts[:-1, 0]
    pts = pts[first]
    hull: list = []
    for px, py in pts:
        while len(hull) >= 2:
            (ox, oy), (ax, ay) = hull[-2], hull[-1]
            if (ax - ox) * (py - oy) - (ay - oy) * (px - ox) >= 0:
                hull.pop()
            else:
                break
        hull.append((px, py))
    return np.array(hull)


def _pair_cloud(row0, row1, kind, grid: EnvelopeGrid):
    w = expit(np.linspace(-grid.logit_range, grid.logit_range, grid.points))
    ps = np.concatenate([[0.0], w, [1.0]])
    qs = ps if not math.isinf(kind.slope_at_infinity) else w
    P, Q = np.meshgrid(ps, qs, indexing="ij")
    P, Q = P.ravel(), Q.ravel()
    near_q = np.repeat(w, len(grid.offsets))
    near_p = near_q + np.tile(grid.offsets, w.size) * near_q * (1.0 - near_q)
    P = np.concatenate([P, near_p])
    Q = np.concatenate([Q, near_q])
    keep = P != Q
    P, Q = P[keep], Q[keep]
    d = P - Q
    d_in = df_binary(kind, P, Q)
    M = Q[:, None] * row0 + (1.0 - Q[:, None]) * row1
    d_out = df_from_diff(kind, M, d[:, None] * (row0 - row1))
    return np.column_stack([d_in, d_out])


def trace_envelope(channel: Channel, kind="kl", window_max: float = 4.0,
                   grid: EnvelopeGrid = EnvelopeGrid()) -> EnvelopeCurve:
    """Upper concave envelope of achievable (input, output) divergence pairs.

    Only binary input pairs are sampled; the envelope of all pairs coincides
    with theirs.  Points with input divergence above ``window_max`` are dropped.
    """
    if not window_max > 0:
        raise ValueError("window_max must be positive")
    kind = DivergenceKind.parse(kind)
    W = channel.matrix
    clouds = [np.zeros((1, 2))]
    for x, y in _row_pairs(channel.input_size):
        clouds.append(_pair_cloud(W[x], W[y], kind, grid))
    cloud = np.concatenate(clouds)
    ok = np.all(np.isfinite(cloud), axis=1) & (cloud[:, 0] <= window_max) & (cloud[:, 0] >= 0)
    cloud = cloud[ok]
    if len(cloud) < 2:
        raise ValueError("no finite points inside the window; increase window_max")
    return EnvelopeCurve(upper_hull(cloud), kind, float(window_max), cloud_size=len(cloud))
