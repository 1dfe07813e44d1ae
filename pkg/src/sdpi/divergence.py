"""f-divergences on finite alphabets.

Every divergence is evaluated as ``sum_x Q(x) f(1 + r(x))`` with
``r = (P - Q) / Q``, using a generator normalised so that ``f >= 0``.  Adding
a multiple of ``t - 1`` to a generator leaves the divergence unchanged, so KL
uses ``t log t - t + 1`` instead of ``t log t``.  Each ``f(1 + r)`` is computed
without cancellation near ``r = 0``, which keeps ratios of tiny divergences
accurate close to the diagonal ``P = Q``.

All outputs are in nats.
"""
from __future__ import annotations

import math
from enum import Enum

import numpy as np
from scipy.special import xlog1py

# Taylor coefficients of (1+r)log(1+r) - r = sum_{k>=2} (-1)^k r^k / (k(k-1)).
_KL_SERIES = np.array([(-1) ** k / (k * (k - 1)) for k in range(2, 12)])
_KL_SERIES_RADIUS = 0.01


class DivergenceKind(Enum):
    KL = "kl"
    TV = "tv"
    CHI2 = "chi2"
    HELLINGER2 = "hellinger2"

    @property
    def second_derivative_at_one(self) -> float | None:
        """``f''(1)``; ``None`` when undefined (TV)."""
        return _F2[self]

    @property
    def slope_at_infinity(self) -> float:
        """``lim f(t)/t`` as ``t -> inf``; ``math.inf`` for KL and CHI2."""
        return _SLOPE[self]

    @classmethod
    def parse(cls, value) -> "DivergenceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown divergence {value!r}; expected one of {names}") from None


_F2 = {DivergenceKind.KL: 1.0, DivergenceKind.TV: None,
       DivergenceKind.CHI2: 2.0, DivergenceKind.HELLINGER2: 0.5}
_SLOPE = {DivergenceKind.KL: math.inf, DivergenceKind.TV: 0.5,
          DivergenceKind.CHI2: math.inf, DivergenceKind.HELLINGER2: 1.0}


_KL_LARGE = 1e100


def _term_kl(Q, D):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = D / Q
        out = np.asarray(Q * (xlog1py(1.0 + r, r) - r))
        big = ~(np.abs(r) <= _KL_LARGE)
        if np.any(big):
            Pb, Qb = Q[big] + D[big], Q[big]
            out[big] = Pb * (np.log(Pb) - np.log(Qb)) - D[big]
    small = np.abs(r) < _KL_SERIES_RADIUS
    if np.any(small):
        rs = r[small]
        poly = np.zeros_like(rs)
        for c in _KL_SERIES[::-1]:
            poly = poly * rs + c
        out[small] = Q[small] * poly * rs * rs
    return out


def _term_tv(Q, D):
    return 0.5 * np.abs(D)


def _term_chi2(Q, D):
    with np.errstate(over="ignore"):
        return D * D / Q


def _term_h2(Q, D):
    s = D / (np.sqrt(Q) + np.sqrt(Q + D))
    return s * s


# Q * f(1 + D/Q) for Q > 0, with D >= -Q
_TERM = {DivergenceKind.KL: _term_kl, DivergenceKind.TV: _term_tv,
         DivergenceKind.CHI2: _term_chi2, DivergenceKind.HELLINGER2: _term_h2}


def generator(kind: DivergenceKind, t):
    """The normalised generator ``f(t)`` (``f(1) = 0``, ``f >= 0``)."""
    kind = DivergenceKind.parse(kind)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = _TERM[kind](np.ones_like(t), t - 1.0)
    return float(out[0]) if out.size == 1 else out


def df_from_diff(kind: DivergenceKind, Q, D):
    """``D_f(Q + D || Q)`` summed over the last axis.

    Passing the difference ``D = P - Q`` explicitly lets callers that know it
    in factored form (e.g. ``(p - q) * (row0 - row1)``) avoid cancellation.
    """
    Q, D = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(D, dtype=float))
    pos = Q > 0
    inside = np.zeros(Q.shape)
    if np.any(pos):
        # P = Q + D >= 0 up to rounding
        inside[pos] = _TERM[kind](Q[pos], np.maximum(D[pos], -Q[pos]))
    P_off = np.where(pos, 0.0, D)
    slope = kind.slope_at_infinity
    if math.isinf(slope):
        outside = np.where(P_off > 0, math.inf, 0.0)
    else:
        outside = slope * np.maximum(P_off, 0.0)
    return np.sum(inside + outside, axis=-1)


def _check(*arrays):
    for a in arrays:
        if np.any(np.isnan(a)):
            raise ValueError("NaN input")


def df(kind, P, Q):
    """``D_f(P || Q)``; batched over leading axes, may return ``inf``."""
    kind = DivergenceKind.parse(kind)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    _check(P, Q)
    if P.shape[-1] != Q.shape[-1]:
        raise ValueError(f"dimension mismatch: {P.shape[-1]} vs {Q.shape[-1]}")
    out = df_from_diff(kind, Q, P - Q)
    return float(out) if np.ndim(out) == 0 else out


def df_binary(kind, p, q):
    """``D_f(Ber(p) || Ber(q))``, through the same kernel as :func:`df`."""
    kind = DivergenceKind.parse(kind)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check(p, q)
    p, q = np.broadcast_arrays(p, q)
    Q = np.stack([q, 1.0 - q], axis=-1)
    d = p - q
    out = df_from_diff(kind, Q, np.stack([d, -d], axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def binary_entropy(x):
    """``h(x)`` in nats."""
    x = np.asarray(x, dtype=float)
    out = -xlog1py(x, x - 1.0) - xlog1py(1.0 - x, -x)
    return float(out) if np.ndim(out) == 0 else out


def mutual_information(joint) -> float:
    """``I(A;B)`` in nats for a joint probability matrix ``J[a, b]``."""
    J = np.asarray(joint, dtype=float)
    _check(J)
    if np.any(J < 0):
        raise ValueError("negative entry in joint distribution")
    if abs(math.fsum(J.ravel()) - 1.0) > 1e-9:
        raise ValueError("joint distribution does not sum to 1")
    prod = np.outer(J.sum(axis=1), J.sum(axis=0))
    return float(df_from_diff(DivergenceKind.KL, prod.ravel(), (J - prod).ravel()))
