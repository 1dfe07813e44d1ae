"""Brute-force checks of the two-point reduction on small channels.

Random pairs of general (non-binary) input distributions are drawn from the
flat measure on the simplex and compared against the pairwise coefficient,
the envelope, and the extreme-point construction.  Sampling is split into
fixed-size chunks, each with its own generator seeded by ``(seed, chunk)``,
so reports do not depend on the thread count.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from sdpi._parallel import pmap
from sdpi.contraction import EnvelopeCurve, eta_f
from sdpi.divergence import DivergenceKind, df, df_from_diff
from sdpi.model import Channel, Distribution, validate_pair
from sdpi.post_sdpi import mixture_post_ratio, post_eta

CHUNK = 8192


@dataclass
class OracleReport:
    samples: int
    max_ratio_found: float
    achieving_pair: tuple
    reference_eta: float
    violations: int
    slack: float
    seed: int
    rejected: int = 0
    discarded: int = 0
    max_excess: float = -math.inf

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        P, Q = self.achieving_pair
        return {
            "samples": self.samples,
            "max_ratio_found": self.max_ratio_found,
            "achieving_pair": {"P": None if P is None else list(P), "Q": None if Q is None else list(Q)},
            "reference_eta": self.reference_eta,
            "violations": self.violations,
            "slack": self.slack,
            "seed": self.seed,
            "rejected": self.rejected,
            "discarded": self.discarded,
            "max_excess": self.max_excess if math.isfinite(self.max_excess) else None,
        }


def flat_simplex(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """``size`` points uniform on the ``n``-simplex via normalised exponential spacings."""
    e = rng.standard_exponential((size, n))
    return e / e.sum(axis=1, keepdims=True)


def _chunks(samples):
    return [(k, min(CHUNK, samples - k * CHUNK)) for k in range(-(-samples // CHUNK))]


def _pairs_chunk(seed, k, size, n):
    rng = np.random.default_rng([seed, k])
    return flat_simplex(rng, n, size), flat_simplex(rng, n, size)


def _divergences(channel, kind, P, Q):
    d_in = df(kind, P, Q)
    d_out = df(kind, channel.push(P), channel.push(Q))
    return np.atleast_1d(d_in), np.atleast_1d(d_out)


def sample_ratio(channel: Channel, kind, P, Q) -> float:
    """Output/input divergence ratio for general input distributions."""
    kind = DivergenceKind.parse(kind)
    if not validate_pair(Distribution(P), Distribution(Q), channel, kind):
        raise ValueError("invalid pair: input divergence is zero or infinite")
    d_in, d_out = _divergences(channel, kind, np.asarray(P, float), np.asarray(Q, float))
    return float(d_out[0] / d_in[0])


def verify_reduction(channel: Channel, kind="kl", samples: int = 100_000, seed: int = 0,
                     slack: float = 1e-6, *, reference: float | None = None, threads=1,
                     tol: float = 1e-6) -> OracleReport:
    """Sample general input pairs and count ratios above the pairwise coefficient."""
    kind = DivergenceKind.parse(kind)
    if reference is None:
        reference = eta_f(channel, kind, tol, threads=threads).eta
    n = channel.input_size

    def run(chunk):
        k, size = chunk
        P, Q = _pairs_chunk(seed, k, size, n)
        d_in, d_out = _divergences(channel, kind, P, Q)
        ok = (d_in > 0) & np.isfinite(d_in)
        r = np.where(ok, d_out / np.where(ok, d_in, 1.0), -np.inf)
        i = int(np.argmax(r))
        return (int(np.count_nonzero(~ok)), int(np.count_nonzero(r > reference + slack)),
                float(r[i]), P[i], Q[i])

    parts = pmap(run, _chunks(samples), threads)
    rejected = sum(p[0] for p in parts)
    violations = sum(p[1] for p in parts)
    top = max(range(len(parts)), key=lambda j: (parts[j][2], -j))
    _, _, best, P, Q = parts[top]
    return OracleReport(samples=samples, max_ratio_found=best,
                        achieving_pair=(P.tolist(), Q.tolist()), reference_eta=float(reference),
                        violations=violations, slack=slack, seed=seed, rejected=rejected,
                        max_excess=best - float(reference))


def lagrangian_gap(channel: Channel, kind, P, Q, lam: float) -> float:
    """``D_f(PW || QW) - lam * D_f(P || Q)``."""
    kind = DivergenceKind.parse(kind)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    d_in = df(kind, P, Q)
    if math.isinf(d_in):
        raise ValueError("input divergence is infinite")
    return float(df(kind, channel.push(P), channel.push(Q)) - lam * d_in)


@dataclass
class Dominance:
    """Outcome of :func:`binary_dominates`.

    ``p`` and ``q`` are the masses the two-point pair puts on ``pair[0]``.
    Unpacks as ``(found, pair, p, q)``.
    """

    found: bool
    pair: tuple
    p: float
    q: float
    gap: float
    reference_gap: float
    method: str = "vertex"

    def __iter__(self):
        return iter((self.found, self.pair, self.p, self.q))


def _two_point(n, i, j, wi, wj):
    v = np.zeros(n)
    v[i] += wi
    v[j] += wj
    return v


def _coupled_vertices(P, Q):
    """Two-point extreme points of ``{Q' : supp Q' in supp Q, sum (P/Q) Q' = 1}``.

    Yields ``(i, j, P', Q')`` with ``P' = (P/Q) Q'``; ``i == j`` marks a
    single-atom vertex (only where ``P/Q = 1``).
    """
    n = P.size
    supp = np.flatnonzero(Q > 0)
    r = P[supp] / Q[supp]
    for a, i in enumerate(supp):
        if abs(r[a] - 1.0) <= 1e-12:
            e = _two_point(n, i, i, 0.5, 0.5)
            yield int(i), int(i), e, e
    for (a, i), (c, j) in itertools.combinations(enumerate(supp), 2):
        if r[a] == r[c]:
            continue
        w = (1.0 - r[c]) / (r[a] - r[c])
        if not 0.0 <= w <= 1.0:
            continue
        yield (int(i), int(j), _two_point(n, i, j, r[a] * w, r[c] * (1.0 - w)),
               _two_point(n, i, j, w, 1.0 - w))


def _grid_gap(channel, kind, i, j, lam, ps, qs):
    row0, row1 = channel.matrix[i], channel.matrix[j]
    p, q = np.meshgrid(ps, qs, indexing="ij")
    d = p - q
    d_in = df_from_diff(kind, np.stack([q, 1 - q], -1), np.stack([d, -d], -1))
    M = q[..., None] * row0 + (1 - q[..., None]) * row1
    d_out = df_from_diff(kind, M, d[..., None] * (row0 - row1))
    return np.where(np.isfinite(d_in), d_out - lam * d_in, -np.inf)


def _free_search(channel, kind, lam, points=1024, rounds=3):
    """Best two-point ``(P', Q')`` pair by grid search and zoom, ignoring the coupling."""
    best = (-math.inf, (0, 1), 0.0, 0.0)
    for i, j in itertools.combinations(range(channel.input_size), 2):
        ps = qs = np.linspace(0.0, 1.0, points)
        width = 1.0
        for _ in range(rounds + 1):
            v = _grid_gap(channel, kind, i, j, lam, ps, qs)
            a, c = np.unravel_index(int(np.argmax(v)), v.shape)
            if v[a, c] > best[0]:
                best = (float(v[a, c]), (i, j), float(ps[a]), float(qs[c]))
            width /= 8.0
            ps = np.clip(np.linspace(ps[a] - width, ps[a] + width, 64), 0, 1)
            qs = np.clip(np.linspace(qs[c] - width, qs[c] + width, 64), 0, 1)
    return best


def binary_dominates(channel: Channel, kind, P, Q, lam: float, tol: float = 1e-8) -> Dominance:
    """Look for a two-point input pair whose Lagrangian gap is at least that of ``(P, Q)``.

    The coupled candidates ``P' = (P/Q) Q'`` at the extreme points of the
    constraint set are enumerated exactly.  If none dominates (possible only
    when ``P`` has mass outside ``supp Q``), an unconstrained grid search over
    two-point pairs is run.
    """
    kind = DivergenceKind.parse(kind)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape or P.size != channel.input_size:
        raise ValueError("dimension mismatch")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    d_in = df(kind, P, Q)
    if not (d_in > 0 and math.isfinite(d_in)):
        if np.allclose(P, Q, rtol=0, atol=1e-12):
            i = int(np.argmax(Q))
            return Dominance(True, (i, i), 1.0, 1.0, 0.0, 0.0, "identity")
        raise ValueError("invalid pair: input divergence is infinite")
    ref = lagrangian_gap(channel, kind, P, Q, lam)
    best = None
    for i, j, Pv, Qv in _coupled_vertices(P, Q):
        gap = lagrangian_gap(channel, kind, Pv, Qv, lam)
        if best is None or gap > best.gap:
            best = Dominance(gap >= ref - tol, (i, j), float(Pv[i]), float(Qv[i]), gap, ref)
    if best is not None and best.found:
        return best
    gap, pair, p, q = _free_search(channel, kind, lam)
    free = Dominance(gap >= ref - tol, pair, p, q, gap, ref, "grid")
    return free if best is None or free.gap > best.gap else best


def envelope_dominates(channel: Channel, kind, curve: EnvelopeCurve, samples: int = 10_000,
                       seed: int = 0, slack: float = 1e-4, *, threads=1) -> OracleReport:
    """Count sampled ``(D_in, D_out)`` points lying above ``curve`` by more than ``slack``.

    Points beyond the curve's last vertex are discarded (outside the window).
    """
    kind = DivergenceKind.parse(kind)
    n = channel.input_size
    x_max = float(curve.d_in[-1])

    def run(chunk):
        k, size = chunk
        P, Q = _pairs_chunk(seed, k, size, n)
        d_in, d_out = _divergences(channel, kind, P, Q)
        inside = np.isfinite(d_in) & (d_in > 0) & (d_in <= x_max)
        excess = np.where(inside, d_out - curve(np.where(inside, d_in, 0.0)), -np.inf)
        ratio = np.where(inside, d_out / np.where(inside, d_in, 1.0), -np.inf)
        i = int(np.argmax(ratio))
        return (int(np.count_nonzero(~inside)), int(np.count_nonzero(excess > slack)),
                float(np.max(excess)), float(ratio[i]), P[i], Q[i])

    parts = pmap(run, _chunks(samples), threads)
    top = max(range(len(parts)), key=lambda j: (parts[j][3], -j))
    return OracleReport(
        samples=samples, max_ratio_found=parts[top][3],
        achieving_pair=(parts[top][4].tolist(), parts[top][5].tolist()),
        reference_eta=curve.max_chord_slope(), violations=sum(p[1] for p in parts),
        slack=slack, seed=seed, discarded=sum(p[0] for p in parts),
        max_excess=max(p[2] for p in parts),
    )


def verify_post(channel: Channel, samples: int = 10_000, seed: int = 0, slack: float = 1e-4, *,
                reference: float | None = None, threads=1, starts: int = 8) -> OracleReport:
    """Sample general input laws ``P_X`` and binary ``U`` kernels ``b`` against the post-SDPI estimate.

    Violations count samples with ``I(U;X) / I(U;Y) > reference + slack``.
    The achieving pair is reported as ``(P_X, b)``.
    """
    if reference is None:
        reference = post_eta(channel, starts=starts, threads=threads).eta_post
    n, m = channel.input_size, channel.output_size

    def run(chunk):
        k, size = chunk
        rng = np.random.default_rng([seed, k])
        px = flat_simplex(rng, n, size)
        b = rng.random((size, m))
        r = mixture_post_ratio(channel, px, b)
        ok = np.isfinite(r)
        r = np.where(ok, r, -np.inf)
        i = int(np.argmax(r))
        return (int(np.count_nonzero(~ok)), int(np.count_nonzero(r > reference + slack)),
                float(r[i]), px[i], b[i])

    parts = pmap(run, _chunks(samples), threads)
    top = max(range(len(parts)), key=lambda j: (parts[j][2], -j))
    _, _, best, px, b = parts[top]
    return OracleReport(samples=samples, max_ratio_found=best, achieving_pair=(px.tolist(), b.tolist()),
                        reference_eta=float(reference), violations=sum(p[1] for p in parts),
                        slack=slack, seed=seed, rejected=sum(p[0] for p in parts),
                        max_excess=best - float(reference))
