"""Backend selection for the batched run loop.

The compiled extension is used when it imports; otherwise the numpy
implementation.  Setting ``DQKD_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _kernel_py

if os.environ.get("DQKD_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernel as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernel_py


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def simulate_runs(ctx, uniforms, symbols=None, backend=None):
    """Run one protocol round per row of `uniforms` (shape (n, NSLOTS)).

    Returns an int64 array of shape (n, NCOLS) laid out as `protocol.Col`.
    """
    impl = _impl
    if backend == "python":
        impl = _kernel_py
    elif backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not built")
        impl = _compiled
    elif backend is not None:
        raise ValueError(f"unknown backend {backend!r}")
    cfg = ctx.config
    f = cfg.field
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    n = uniforms.shape[0]
    if symbols is None:
        symbols = np.full(n, -1, dtype=np.int64)
    symbols = np.ascontiguousarray(symbols, dtype=np.int64)
    if symbols.shape != (n,):
        raise ValueError("need one symbol entry per run")
    return impl.simulate_runs(uniforms, symbols,
                              np.ascontiguousarray(ctx.tab.vectors),
                              np.ascontiguousarray(f.sub_table, dtype=np.int64),
                              ctx.zphase, float(cfg.c), ctx.strategy_code,
                              bool(cfg.ir_independent_bases))
