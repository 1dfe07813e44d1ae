"""Post-SDPI coefficient: the best constant in ``I(U;X) <= eta I(U;Y)`` for ``X - Y - U``.

``U`` is binary, described by ``b[y] = P(U=1 | Y=y)``, and ``X`` is supported
on two input letters with weight ``p``.  The supremum over ``b`` is searched by
multi-start compass search, so :func:`post_eta` is a lower estimate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from sdpi._parallel import pmap
from sdpi.divergence import DivergenceKind, df_from_diff
from sdpi.model import Channel

MAX_OUTPUT = 12
NEAR_CONSTANT_EPS = 1e-4


@dataclass(frozen=True)
class PostProblem:
    channel: Channel
    pair: tuple
    p: float
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if b.shape != (self.channel.output_size,) or np.any((b < 0) | (b > 1)):
            raise ValueError("b must be a vector in [0, 1]^output_size")
        object.__setattr__(self, "b", b)

    def to_dict(self) -> dict:
        return {"pair": list(self.pair), "p": self.p, "b": self.b.tolist()}


@dataclass
class PostResult:
    eta_post: float
    best: PostProblem | None
    converged: bool
    starts_used: int
    evaluations: int = 0
    max_ratio_seen: float = 0.0

    def to_dict(self) -> dict:
        return {
            "eta_post": self.eta_post,
            "best": None if self.best is None else self.best.to_dict(),
            "converged": self.converged,
            "starts_used": self.starts_used,
            "evaluations": self.evaluations,
            "lower_estimate": True,
        }


def _bkl(d, m, one_minus_m):
    """Binary KL ``D(Ber(m + d) || Ber(m))``."""
    return df_from_diff(DivergenceKind.KL, np.stack([m, one_minus_m], -1), np.stack([d, -d], -1))


def _ratio_batch(row0, row1, p, b):
    """``I(U;X) / I(U;Y)``; ``p`` has shape ``(...)`` and ``b`` shape ``(..., m)``.

    Both informations are averages of binary KL divergences to ``P(U=1)``,
    computed from the deviations ``b - b[0]`` so that nearly constant ``b``
    keeps full relative precision and constant ``b`` gives exactly ``0/0``.
    """
    p = np.asarray(p, dtype=float)
    b = np.asarray(b, dtype=float)
    c = b[..., :1]
    e = b - c
    PY = p[..., None] * row0 + (1.0 - p[..., None]) * row1
    ebar = np.sum(PY * e, axis=-1) / np.sum(PY, axis=-1)
    c = c[..., 0]
    mean, comp = c + ebar, (1.0 - c) - ebar
    d0 = e @ row0 / row0.sum() - ebar
    d1 = e @ row1 / row1.sum() - ebar
    i_ux = p * _bkl(d0, mean, comp) + (1.0 - p) * _bkl(d1, mean, comp)
    dy = e - ebar[..., None]
    i_uy = np.sum(PY * _bkl(dy, mean[..., None], comp[..., None]), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(i_uy > 0, i_ux / np.where(i_uy > 0, i_uy, 1.0), np.nan)


def mixture_post_ratio(channel: Channel, px, b):
    """``I(U;X) / I(U;Y)`` for an arbitrary input law; batched over leading axes.

    ``px`` has shape ``(..., input_size)`` and ``b`` shape ``(..., output_size)``.
    ``nan`` where ``I(U;Y) = 0``.
    """
    W = channel.matrix
    px = np.asarray(px, dtype=float)
    b = np.asarray(b, dtype=float)
    c = b[..., :1]
    e = b - c
    PY = px @ W
    ebar = np.sum(PY * e, axis=-1)
    c = c[..., 0]
    mean, comp = c + ebar, (1.0 - c) - ebar
    dx = e @ W.T - ebar[..., None]
    i_ux = np.sum(px * _bkl(dx, mean[..., None], comp[..., None]), axis=-1)
    dy = e - ebar[..., None]
    i_uy = np.sum(PY * _bkl(dy, mean[..., None], comp[..., None]), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(i_uy > 0, i_ux / np.where(i_uy > 0, i_uy, 1.0), np.nan)


def post_ratio(problem: PostProblem) -> float:
    """``I(U;X) / I(U;Y)`` for the chain ``X - Y - U`` described by ``problem``."""
    W = problem.channel.matrix
    x, y = problem.pair
    out = float(_ratio_batch(W[x], W[y], problem.p, problem.b))
    if np.isnan(out):
        raise ValueError("I(U;Y) = 0: U is independent of Y")
    return out


def _start_points(rng, n, m, p_count):
    """``n`` uniform starts and ``n`` near-constant starts, for each of ``p_count`` cells."""
    uniform = rng.random((p_count, n, m))
    c = rng.uniform(0.05, 0.95, size=(p_count, n, 1))
    d = rng.standard_normal((p_count, n, m))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    near = np.clip(c + NEAR_CONSTANT_EPS * d, 0.0, 1.0)
    return np.concatenate([uniform, near], axis=1)


def _compass(row0, row1, p, b, step, step_min, budget, polish_p=False, max_iter=400):
    """Batched compass search maximising the ratio.

    ``p`` (shape ``B``) and ``b`` (``B x m``) are updated in place.  With
    ``polish_p`` the weight ``p`` is searched as one more coordinate.
    Returns ``(values, evaluations, history, finished, max_seen)``; ``finished``
    is false if the budget or ``max_iter`` stopped the search first.
    """
    B, m = b.shape
    val = np.nan_to_num(_ratio_batch(row0, row1, p, b), nan=-np.inf)
    step = np.full(B, float(step))
    evals = B
    history = [float(np.max(val))]
    seen = history[0]
    dims = m + (1 if polish_p else 0)
    eye = np.eye(dims)
    dirs = np.concatenate([eye, -eye])
    for _ in range(max_iter):
        act = np.flatnonzero(step >= step_min)
        if act.size == 0 or evals + act.size * 2 * dims > budget:
            break
        cand = np.concatenate([b[act], p[act, None]], axis=1) if polish_p else b[act]
        trial = cand[:, None, :] + step[act, None, None] * dirs[None]
        trial[..., :m] = np.clip(trial[..., :m], 0.0, 1.0)
        if polish_p:
            trial[..., m] = np.clip(trial[..., m], 1e-9, 1.0 - 1e-9)
            tp = trial[..., m]
        else:
            tp = np.broadcast_to(p[act, None], trial.shape[:2])
        v = np.nan_to_num(_ratio_batch(row0, row1, tp, trial[..., :m]), nan=-np.inf)
        evals += v.size
        seen = max(seen, float(np.max(v)))
        k = np.argmax(v, axis=1)
        best = v[np.arange(act.size), k]
        move = best > val[act]
        idx = act[move]
        b[idx] = trial[move, k[move], :m]
        if polish_p:
            p[idx] = trial[move, k[move], m]
        val[idx] = best[move]
        step[act[~move]] /= 2.0
        history.append(float(np.max(val)))
    return val, evals, history, not np.any(step >= step_min), seen


def post_eta(channel: Channel, tol: float = 1e-6, starts: int = 8, budget: int = 50_000_000,
             seed: int = 0, p_points: int = 64, threads=1, max_output: int = MAX_OUTPUT) -> PostResult:
    """Lower estimate of the post-SDPI coefficient of ``channel``.

    For every pair of input letters and every weight on a ``p_points`` grid,
    ``starts`` uniform and ``starts`` near-constant initial ``b`` vectors are
    refined by compass search.  The best few cells are then polished with
    ``p`` free.  ``converged`` is false when the budget ran out or the final
    polish still moved the estimate by ``tol`` or more.
    """
    if channel.input_size < 2:
        raise ValueError("post-SDPI needs at least two input letters")
    if channel.output_size > max_output:
        raise ValueError(f"output alphabet larger than {max_output}")
    W = channel.matrix
    m = channel.output_size
    pairs = list(itertools.combinations(range(channel.input_size), 2))
    ps = np.arange(1, p_points + 1) / (p_points + 1)
    per_pair_budget = budget // max(len(pairs), 1)

    def search(index):
        x, y = pairs[index]
        rng = np.random.default_rng([seed, index])
        if np.array_equal(W[x], W[y]):
            return 0.0, None, 0, True, 0.0
        b = _start_points(rng, starts, m, p_points).reshape(-1, m)
        p = np.repeat(ps, 2 * starts)
        val, evals, _, done, seen = _compass(W[x], W[y], p, b, 0.25, tol, per_pair_budget)
        top = np.argsort(-val, kind="stable")[: 2 * starts]
        pp, bb = p[top].copy(), b[top].copy()
        val2, evals2, hist, done2, seen2 = _compass(W[x], W[y], pp, bb, 1e-2, tol,
                                                    max(per_pair_budget - evals, 0), polish_p=True)
        seen = max(seen, seen2)
        i = int(np.argmax(val2))
        stable = len(hist) < 2 or hist[-1] - hist[-2] < tol
        return float(val2[i]), (float(pp[i]), bb[i].copy()), evals + evals2, done and done2 and stable, seen

    results = pmap(search, range(len(pairs)), threads)
    best_val, best_problem = 0.0, None
    for (x, y), (v, arg, _, _, _) in zip(pairs, results):
        if arg is not None and v > best_val:
            best_val = v
            best_problem = PostProblem(channel, (x, y), arg[0], np.clip(arg[1], 0.0, 1.0))
    return PostResult(
        eta_post=float(min(max(best_val, 0.0), 1.0)),
        best=best_problem,
        converged=all(r[3] for r in results),
        starts_used=2 * starts * p_points * len(pairs),
        evaluations=sum(r[2] for r in results),
        max_ratio_seen=max([r[4] for r in results], default=0.0),
    )
