"""Backend selection for the hot kernels.

The compiled extension is preferred when present; the numpy fallback is
bit-compatible within floating-point reassociation noise.  Set
UNITFOLD_KERNELS=python (or =compiled) to force a backend.
"""

import os

_requested = os.environ.get("UNITFOLD_KERNELS", "auto")

if _requested not in ("auto", "compiled", "python"):
    raise ValueError(f"UNITFOLD_KERNELS must be auto, compiled or python, got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as _impl
        BACKEND = "python"

chain_product = _impl.chain_product
prefix_suffix = _impl.prefix_suffix
trace_product = _impl.trace_product
sandwich = _impl.sandwich
