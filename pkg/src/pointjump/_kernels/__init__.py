"""Backend selection: compiled extension when present, pure Python otherwise.

Set POINTJUMP_PURE=1 to force the fallback (used by the benchmark and by
tests that assert backend equivalence).
"""

from __future__ import annotations

import os

if os.environ.get("POINTJUMP_PURE"):
    from . import _fallback as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

BACKEND: str = _impl.BACKEND
rk4_duality = _impl.rk4_duality
e2_lattice_sum = _impl.e2_lattice_sum

PROFILE_IDS = {"tanh": 0, "algebraic": 1, "smoothstep": 2}

__all__ = ["BACKEND", "rk4_duality", "e2_lattice_sum", "PROFILE_IDS"]
