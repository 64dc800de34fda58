"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled `_speedups` extension; `kernels` picks one
at import time.
"""

import numpy as np


def chain_product(mats: np.ndarray) -> np.ndarray:
    """Product of a (k, N, N) stack with the first matrix acting first:
    result = mats[k-1] @ ... @ mats[0]."""
    k, n, _ = mats.shape
    out = np.eye(n, dtype=complex)
    for i in range(k):
        out = mats[i] @ out
    return out


def prefix_suffix(mats: np.ndarray):
    """Running products of a (k, N, N) stack.

    prefix[i] = mats[i-1] @ ... @ mats[0]  (prefix[0] = I)
    suffix[i] = mats[k-1] @ ... @ mats[i]  (suffix[k] = I)
    so prefix[k] == suffix[0] == chain_product(mats) and, for any i,
    suffix[i+1] @ mats[i] @ prefix[i] is the full product.
    """
    k, n, _ = mats.shape
    prefix = np.empty((k + 1, n, n), dtype=complex)
    suffix = np.empty((k + 1, n, n), dtype=complex)
    prefix[0] = np.eye(n)
    suffix[k] = np.eye(n)
    for i in range(k):
        prefix[i + 1] = mats[i] @ prefix[i]
    for i in range(k - 1, -1, -1):
        suffix[i] = suffix[i + 1] @ mats[i]
    return prefix, suffix


def trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    """tr(a @ b) without forming the product."""
    return complex(np.einsum("ij,ji->", a, b))


def sandwich(left: np.ndarray, mid: np.ndarray, right: np.ndarray) -> np.ndarray:
    """left @ mid @ right."""
    return left @ mid @ right
