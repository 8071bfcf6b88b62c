"""Backend selection for the 2-d geometry kernels.

The compiled Cython extension is preferred; the pure NumPy reference
implementation is the fallback.  Set HYPERCELL_PURE=1 to force the pure
path (used by the benchmark and the cross-backend tests).
"""
import os

from hypercell._kernels import _ref


def _load():
    if os.environ.get("HYPERCELL_PURE") == "1":
        return _ref, "pure"
    try:
        from hypercell._kernels import _core  # type: ignore[attr-defined]

        return _core, "compiled"
    except ImportError:
        return _ref, "pure"


_impl, BACKEND = _load()

convex_hull_2d = _impl.convex_hull_2d
polygon_distance = _impl.polygon_distance
cut_mask = _impl.cut_mask


def get_backend(name: str):
    """Return the named kernel module ("pure" or "compiled")."""
    if name == "pure":
        return _ref
    if name == "compiled":
        from hypercell._kernels import _core  # raises ImportError if not built

        return _core
    raise ValueError(f"unknown backend {name!r}")
