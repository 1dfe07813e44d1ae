"""Contraction coefficient of a binary-input subchannel.

For two channel rows ``row0``, ``row1`` the coefficient is

    sup_{p != q}  D_f(p*row0 + (1-p)*row1 || q*row0 + (1-q)*row1) / D_f(Ber(p) || Ber(q)),

which is located here by a deterministic coarse grid followed by zoom
refinement, plus a separate scan of the limit ``p -> q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sdpi.divergence import DivergenceKind, df, df_from_diff

try:
    from sdpi._kernels import ratio_grid as _compiled_grid
except ImportError:  # pragma: no cover - numba missing
    _compiled_grid = None

DPI_SLACK = 1e-9
_CODES = {DivergenceKind.KL: 0, DivergenceKind.TV: 1, DivergenceKind.CHI2: 2,
          DivergenceKind.HELLINGER2: 3}


@dataclass(frozen=True)
class SolverConfig:
    coarse: int = 512
    edge: float = 1.0 / 1024
    keep: int = 16
    zoom_points: int = 64
    shrink: float = 8.0
    max_rounds: int = 4
    diagonal_points: int = 512
    budget: int = 2_000_000
    fast_path: bool = True


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class BinaryProblem:
    row0: np.ndarray
    row1: np.ndarray
    kind: DivergenceKind = DivergenceKind.KL

    def __post_init__(self):
        r0 = np.asarray(self.row0, dtype=float)
        r1 = np.asarray(self.row1, dtype=float)
        if r0.shape != r1.shape or r0.ndim != 1:
            raise ValueError("rows must be vectors of equal length")
        object.__setattr__(self, "row0", r0)
        object.__setattr__(self, "row1", r1)
        object.__setattr__(self, "kind", DivergenceKind.parse(self.kind))

    def swapped(self) -> "BinaryProblem":
        return BinaryProblem(self.row1, self.row0, self.kind)


@dataclass
class BinarySolution:
    """Result of :func:`solve_binary`.

    When ``on_diagonal`` is set the supremum is approached as ``p -> q``;
    ``arg_p`` then equals ``arg_q``.
    """

    eta: float
    arg_p: float
    arg_q: float
    on_diagonal: bool
    evaluations: int
    achieved_tol: float
    raw_eta: float = 0.0
    reached_tol: bool = True
    budget_exhausted: bool = False
    anomaly: bool = False
    max_ratio_seen: float = 0.0
    round_best: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "arg_p": self.arg_p,
            "arg_q": self.arg_q,
            "on_diagonal": self.on_diagonal,
            "evaluations": self.evaluations,
            "achieved_tol": self.achieved_tol,
            "reached_tol": self.reached_tol,
            "budget_exhausted": self.budget_exhausted,
            "anomaly": self.anomaly,
        }


def _ratios(problem: BinaryProblem, p, q):
    """Vectorised ratio; ``nan`` where the input divergence is 0 or infinite."""
    r0, r1 = problem.row0, problem.row1
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    d = p - q
    M = q[..., None] * r0 + (1.0 - q[..., None]) * r1
    num = df_from_diff(problem.kind, M, d[..., None] * (r0 - r1))
    den = df_from_diff(problem.kind, np.stack([q, 1.0 - q], -1), np.stack([d, -d], -1))
    ok = (den > 0) & np.isfinite(den)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(ok, num / np.where(ok, den, 1.0), np.nan)


def _grid(problem: BinaryProblem, ps, qs):
    """Ratio matrix over the outer product ``ps x qs``."""
    ps = np.ascontiguousarray(ps, dtype=float)
    qs = np.ascontiguousarray(qs, dtype=float)
    if _compiled_grid is None:
        return _ratios(problem, ps[:, None], qs[None, :])
    kind = problem.kind
    return _compiled_grid(_CODES[kind], float(kind.slope_at_infinity),
                          problem.row0, problem.row1, ps, qs)


def ratio_at(problem: BinaryProblem, p: float, q: float) -> float:
    """Output/input divergence ratio at binary inputs ``Ber(p)``, ``Ber(q)``."""
    out = float(_ratios(problem, p, q))
    if math.isnan(out):
        raise ValueError(f"input divergence is zero or infinite at p={p}, q={q}")
    return out


def _diagonal(problem: BinaryProblem, q):
    q = np.asarray(q, dtype=float)
    r0, r1 = problem.row0, problem.row1
    delta = r0 - r1
    M = q[..., None] * r0 + (1.0 - q[..., None]) * r1
    keep = M > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(keep, delta * delta / np.where(keep, M, 1.0), 0.0)
    return q * (1.0 - q) * terms.sum(axis=-1)


def diagonal_limit(problem: BinaryProblem, q: float) -> float:
    """Limit of :func:`ratio_at` as ``p -> q`` (a chi-square type ratio)."""
    if problem.kind.second_derivative_at_one is None:
        raise ValueError(f"{problem.kind.value}: f''(1) undefined, no diagonal limit")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in the open interval (0, 1)")
    return float(_diagonal(problem, q))


def _top(values: np.ndarray, k: int) -> np.ndarray:
    """Flat indices of the ``k`` largest finite entries, best first, ties by index."""
    flat = np.where(np.isfinite(values), values, -np.inf).ravel()
    k = min(k, int(np.count_nonzero(np.isfinite(flat))))
    if k == 0:
        return np.array([], dtype=int)
    if k == 1:
        return np.array([int(np.argmax(flat))])
    threshold = np.partition(flat, flat.size - k)[flat.size - k]
    cand = np.flatnonzero(flat >= threshold)
    order = np.lexsort((cand, -flat[cand]))
    return cand[order[:k]]


class _Counter:
    def __init__(self, budget):
        self.used = 0
        self.budget = budget
        self.exhausted = False

    def allows(self, n):
        if self.used + n > self.budget:
            self.exhausted = True
            return False
        return True

    def spend(self, n):
        self.used += n


def _search_offdiagonal(problem, cfg, tol, counter):
    q_edges = not math.isinf(problem.kind.slope_at_infinity)
    interior = np.linspace(cfg.edge, 1.0 - cfg.edge, cfg.coarse)
    w = interior[1] - interior[0]
    ps = np.concatenate([[0.0], interior, [1.0]])
    qs = np.concatenate([[0.0], interior, [1.0]]) if q_edges else interior
    counter.spend(ps.size * qs.size)
    vals = _grid(problem, ps, qs)
    idx = _top(vals, cfg.keep)
    if idx.size == 0:
        return 0.0, (1.0, 0.5), [0.0], w, 0.0
    seen = float(np.nanmax(vals))
    ip, iq = np.unravel_index(idx, vals.shape)
    centres = [(ps[i], qs[j], vals[i, j]) for i, j in zip(ip, iq)]
    best = centres[0]
    history = [best[2]]
    spacing = w
    n = cfg.zoom_points
    for _ in range(cfg.max_rounds):
        if spacing <= tol or not counter.allows(len(centres) * n * n):
            break
        new = []
        for cp, cq, cv in centres:
            gp = np.unique(np.clip(np.linspace(cp - w, cp + w, n), 0.0, 1.0))
            gq = np.unique(np.clip(np.linspace(cq - w, cq + w, n), 0.0, 1.0))
            if not q_edges:
                gq = gq[(gq > 0.0) & (gq < 1.0)]
            counter.spend(gp.size * gq.size)
            v = _grid(problem, gp, gq)
            top = _top(v, 1)
            if top.size:
                seen = max(seen, float(np.nanmax(v)))
                i, j = np.unravel_index(top[0], v.shape)
                if v[i, j] > cv:
                    cp, cq, cv = gp[i], gq[j], v[i, j]
            new.append((cp, cq, cv))
        centres = new
        spacing = 2.0 * w / (n - 1)
        w /= cfg.shrink
        best = max([best] + centres, key=lambda c: c[2])
        history.append(best[2])
    return best[2], (best[0], best[1]), history, spacing, seen


def _search_diagonal(problem, cfg, tol, counter):
    qs = np.linspace(cfg.edge, 1.0 - cfg.edge, cfg.diagonal_points)
    w = qs[1] - qs[0]
    counter.spend(qs.size)
    vals = _diagonal(problem, qs)
    centres = [(qs[i], vals[i]) for i in _top(vals, cfg.keep)]
    best = centres[0]
    spacing = w
    n = cfg.zoom_points
    for _ in range(cfg.max_rounds):
        if spacing <= tol or not counter.allows(len(centres) * n):
            break
        new = []
        for cq, cv in centres:
            g = np.linspace(cq - w, cq + w, n)
            g = g[(g > 0.0) & (g < 1.0)]
            counter.spend(g.size)
            v = _diagonal(problem, g)
            i = int(np.argmax(v))
            if v[i] > cv:
                cq, cv = g[i], v[i]
            new.append((cq, cv))
        centres = new
        spacing = 2.0 * w / (n - 1)
        w /= cfg.shrink
        best = max([best] + centres, key=lambda c: c[1])
    return best[1], best[0], spacing


def solve_binary(problem: BinaryProblem, tol: float = 1e-6, budget: int | None = None,
                 config: SolverConfig = DEFAULT_CONFIG) -> BinarySolution:
    """Supremum of the divergence ratio over binary input pairs.

    Parameters
    ----------
    problem : BinaryProblem
        The two rows and the divergence.
    tol : float
        Zoom rounds stop once the local grid spacing in (p, q) is below ``tol``.
    budget : int, optional
        Cap on ratio evaluations; overrides ``config.budget``.  Running out is
        not an error: the best estimate so far is returned with
        ``budget_exhausted`` set.
    config : SolverConfig
        Grid sizes.  ``fast_path=False`` forces the generic search for TV.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    kind = problem.kind
    if kind is DivergenceKind.TV and config.fast_path:
        # on binary inputs the TV ratio is TV(row0, row1) for every p != q
        eta = float(df(kind, problem.row0, problem.row1))
        return BinarySolution(eta=eta, arg_p=1.0, arg_q=0.0, on_diagonal=False, evaluations=1,
                              achieved_tol=0.0, raw_eta=eta, max_ratio_seen=eta, round_best=[eta])
    counter = _Counter(config.budget if budget is None else budget)

    raw, (ap, aq), history, spacing, seen = _search_offdiagonal(problem, config, tol, counter)
    on_diag = False
    if kind.second_derivative_at_one is not None:
        diag, dq, dspacing = _search_diagonal(problem, config, tol, counter)
        spacing = max(spacing, dspacing)
        if diag > raw:
            raw, ap, aq, on_diag = diag, dq, dq, True
            history = [max(h, diag) for h in history]
    anomaly = raw > 1.0 + DPI_SLACK or seen > 1.0 + DPI_SLACK
    return BinarySolution(
        eta=float(min(max(raw, 0.0), 1.0)), arg_p=float(ap), arg_q=float(aq),
        on_diagonal=on_diag, evaluations=counter.used, achieved_tol=float(spacing),
        raw_eta=float(raw), reached_tol=bool(spacing <= tol),
        budget_exhausted=counter.exhausted, anomaly=bool(anomaly),
        max_ratio_seen=float(seen), round_best=[float(h) for h in history],
    )
