"""Compiled grid kernels for the binary solver.

Scalar re-statements of the generators in :mod:`sdpi.divergence`; the test
suite checks both paths agree.  Kind codes: 0 KL, 1 TV, 2 CHI2, 3 HELLINGER2.
"""
import math

import numpy as np
from numba import njit

_KL_COEFFS = np.array([(-1) ** k / (k * (k - 1)) for k in range(2, 12)])[::-1].copy()


@njit(cache=True, nogil=True)
def _term(code, Q, D):
    """``Q f(1 + D/Q)`` for ``Q > 0``; mirrors ``divergence._TERM``."""
    if D < -Q:
        D = -Q
    if code == 0:
        r = D / Q
        if abs(r) < 0.01:
            acc = 0.0
            for c in _KL_COEFFS:
                acc = acc * r + c
            return Q * acc * r * r
        if not abs(r) <= 1e100:
            P = Q + D
            return P * (math.log(P) - math.log(Q)) - D
        if r <= -1.0:
            return Q
        return Q * ((1.0 + r) * math.log1p(r) - r)
    if code == 1:
        return 0.5 * abs(D)
    if code == 2:
        return D * D / Q
    s = D / (math.sqrt(Q) + math.sqrt(Q + D))
    return s * s


@njit(cache=True, nogil=True)
def ratio_grid(code, slope, row0, row1, ps, qs):
    """Ratio matrix over ``ps x qs``; ``nan`` where the input divergence is 0 or inf."""
    m = row0.size
    out = np.empty((ps.size, qs.size))
    delta = row0 - row1
    M = np.empty(m)
    for j in range(qs.size):
        q = qs[j]
        for y in range(m):
            M[y] = q * row0[y] + (1.0 - q) * row1[y]
        for i in range(ps.size):
            d = ps[i] - q
            # input divergence D_f(Ber(p) || Ber(q))
            den = 0.0
            if q > 0.0:
                den += _term(code, q, d)
            elif d > 0.0:
                den += slope * d
            if q < 1.0:
                den += _term(code, 1.0 - q, -d)
            elif d < 0.0:
                den -= slope * d
            if not (den > 0.0) or math.isinf(den):
                out[i, j] = np.nan
                continue
            num = 0.0
            for y in range(m):
                if M[y] > 0.0:
                    num += _term(code, M[y], d * delta[y])
                else:
                    e = d * delta[y]
                    if e > 0.0:
                        num += slope * e
            out[i, j] = num / den
    return out
