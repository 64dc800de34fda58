"""Independent oracle implementations used only by the tests.

These deliberately use different algorithms from the package so that
agreement is evidence, not tautology.
"""

import numpy as np


def char_poly_newton(u: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients via power traces and the
    Newton identities.

    Returns the full monic coefficient array c[0..N], c[0] = 1, where the
    polynomial is sum_k c[k] x^{N-k}.  Uses e_k (elementary symmetric
    polynomials of the eigenvalues) from p_k = tr(u^k):
        k e_k = sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i,   c[k] = (-1)^k e_k.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    powers = np.eye(n, dtype=complex)
    p = np.zeros(n + 1, dtype=complex)
    for k in range(1, n + 1):
        powers = powers @ u
        p[k] = np.trace(powers)
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0 + 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i]
        e[k] = acc / k
    signs = (-1.0) ** np.arange(n + 1)
    return signs * e


def five_point_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    """O(h^4) five-point stencil gradient of a scalar function."""
    g = np.zeros(len(x))
    for k in range(len(x)):
        xp = x.copy()
        probes = []
        for shift in (2 * h, h, -h, -2 * h):
            xp[k] = x[k] + shift
            probes.append(f(xp))
        xp[k] = x[k]
        g[k] = (-probes[0] + 8 * probes[1] - 8 * probes[2] + probes[3]) / (12 * h)
    return g
