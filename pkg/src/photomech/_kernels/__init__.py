"""Hot kernels: compiled extension when available, NumPy fallback otherwise.

Set ``PHOTOMECH_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
implementation in use.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("PHOTOMECH_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

try:
    from . import _core as compiled  # type: ignore[attr-defined]
except ImportError:
    compiled = None

spectral_density = _impl.spectral_density
propagate = _impl.propagate

__all__ = ["BACKEND", "spectral_density", "propagate", "fallback", "compiled"]
