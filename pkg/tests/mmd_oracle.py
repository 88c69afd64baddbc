"""Explicit double-loop MK-MMD used as an independent oracle in tests."""

import math


def kernel(x, y, sigma):
    sq = 0.0
    for a, b in zip(x, y):
        sq += (a - b) * (a - b)
    return math.exp(-sq / (2.0 * sigma * sigma))


def mmd_per_kernel(xs, xt, sigma, kind):
    m, n = len(xs), len(xt)
    ss = st = tt = 0.0
    for i in range(m):
        for j in range(m):
            if kind == "unbiased" and i == j:
                continue
            ss += kernel(xs[i], xs[j], sigma)
    for i in range(m):
        for j in range(n):
            st += kernel(xs[i], xt[j], sigma)
    for i in range(n):
        for j in range(n):
            if kind == "unbiased" and i == j:
                continue
            tt += kernel(xt[i], xt[j], sigma)
    if kind == "biased":
        return ss / (m * m) - 2.0 * st / (m * n) + tt / (n * n)
    return ss / (m * (m - 1)) - 2.0 * st / (m * n) + tt / (n * (n - 1))


def mkmmd(xs, xt, bandwidths, coefficients, kind="biased"):
    return sum(b * mmd_per_kernel(xs, xt, s, kind) for s, b in zip(bandwidths, coefficients))
