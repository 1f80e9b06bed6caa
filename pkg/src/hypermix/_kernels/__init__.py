"""Kernel backend selection.

The hot per-hyperedge loops exist twice: a Cython extension
(``hypermix._kernels._speedups``) and a pure numpy fallback
(``hypermix._kernels.reference``).  The compiled backend is picked at
import when available; ``HYPERMIX_KERNELS=numpy|compiled`` forces a
choice (``compiled`` raises if the extension is missing).  Both
implement the same contracts and agree to floating-point roundoff;
``benchmarks/kernel_benchmark.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

from . import reference

_BACKENDS = {"numpy": reference}

try:
    from . import _speedups  # type: ignore[attr-defined]

    _BACKENDS["compiled"] = _speedups
except ImportError:
    _speedups = None

_requested = os.environ.get("HYPERMIX_KERNELS", "auto").lower()
if _requested == "auto":
    _active = "compiled" if "compiled" in _BACKENDS else "numpy"
elif _requested in _BACKENDS:
    _active = _requested
elif _requested == "compiled":
    raise ImportError(
        "HYPERMIX_KERNELS=compiled but the compiled extension is not built")
else:
    raise ImportError(f"unknown HYPERMIX_KERNELS value {_requested!r}")


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    _active = name


def _as_csr(offsets, members):
    return (np.ascontiguousarray(offsets, dtype=np.int64),
            np.ascontiguousarray(members, dtype=np.int64))


def edge_intensities(offsets, members, u, w):
    offsets, members = _as_csr(offsets, members)
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _BACKENDS[_active].edge_intensities(offsets, members, u, w)


def membership_numerators(offsets, members, coef, u, w):
    offsets, members = _as_csr(offsets, members)
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _BACKENDS[_active].membership_numerators(offsets, members, coef, u, w)


def affinity_numerators(offsets, members, coef, u):
    offsets, members = _as_csr(offsets, members)
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    return _BACKENDS[_active].affinity_numerators(offsets, members, coef, u)
