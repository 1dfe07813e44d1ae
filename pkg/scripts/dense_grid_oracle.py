"""Brute-force grid oracle for binary-input contraction values.

Plain-formula evaluation on a dense (p, q) grid, deliberately independent of
the package code.  Used to freeze the reference constants in the test suite.

    python scripts/dense_grid_oracle.py
"""
import numpy as np


def kl(P, Q):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, P * np.log(P / Q), 0.0)
    return t.sum(axis=-1)


def dense_eta_kl(row0, row1, n=4096, chunk=256):
    row0, row1 = np.asarray(row0, float), np.asarray(row1, float)
    grid = (np.arange(n) + 0.5) / n
    best = 0.0
    for start in range(0, n, chunk):
        p = grid[start:start + chunk, None]
        q = grid[None, :]
        num = kl(p[..., None] * row0 + (1 - p[..., None]) * row1,
                 q[..., None] * row0 + (1 - q[..., None]) * row1)
        den = kl(np.stack([p + 0 * q, 1 - p + 0 * q], -1),
                 np.stack([q + 0 * p, 1 - q + 0 * p], -1))
        ok = np.abs(p - q) > 0
        best = max(best, np.max(np.where(ok, num / np.where(ok, den, 1), 0)))
    # diagonal scan: chi^2-type local ratio
    qs = np.linspace(1e-6, 1 - 1e-6, 200001)
    M = qs[:, None] * row0 + (1 - qs[:, None]) * row1
    d = row0 - row1
    with np.errstate(divide="ignore", invalid="ignore"):
        loc = qs * (1 - qs) * np.where(M > 0, d ** 2 / M, 0).sum(-1)
    return best, float(loc.max())


if __name__ == "__main__":
    for delta in (0.05, 0.1, 0.25):
        r0, r1 = [1 - delta, delta], [delta, 1 - delta]
        g, dg = dense_eta_kl(r0, r1)
        diam = 2 - 4 * np.sqrt(delta * (1 - delta))
        t = diam / 2
        print(f"BSC({delta}): grid={g:.8f} diagonal={dg:.8f} g(d/2)={2*t*(1-t/2):.8f}")
    for eps in (0.25, 0.5):
        r0, r1 = [1 - eps, 0, eps], [0, 1 - eps, eps]
        g, dg = dense_eta_kl(r0, r1)
        print(f"BEC({eps}): grid={g:.8f} diagonal={dg:.8f} 1-eps={1-eps}")
    # single-point values
    p, q = 0.9, 0.1
    r0, r1 = np.array([0.9, 0.1]), np.array([0.1, 0.9])
    num = kl(p * r0 + (1 - p) * r1, q * r0 + (1 - q) * r1)
    den = kl(np.array([p, 1 - p]), np.array([q, 1 - q]))
    print("BSC(0.1) ratio at (0.9,0.1):", num, den, num / den)
    print("KL((.5,.5)||(.25,.75)) =", kl(np.array([.5, .5]), np.array([.25, .75])))
    h = lambda x: -x * np.log(x) - (1 - x) * np.log(1 - x)
    print("post ratio BSC(0.1):", (np.log(2) - h(0.1)) / np.log(2))
