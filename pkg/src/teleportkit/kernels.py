"""Backend selection for the hot loops.

The compiled extension is used when importable; set ``TELEPORTKIT_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("TELEPORTKIT_PURE_PYTHON", "") not in ("", "0"):
    from teleportkit import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from teleportkit import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from teleportkit import _kernels_py as _impl

        BACKEND = "python"


def apply_matrix(state: np.ndarray, n: int, mat: np.ndarray, qubits) -> np.ndarray:
    return _impl.apply_matrix(
        np.ascontiguousarray(state, dtype=np.complex128),
        int(n),
        np.ascontiguousarray(mat, dtype=np.complex128),
        np.ascontiguousarray(qubits, dtype=np.intc),
    )


def xor_bits(a, b) -> np.ndarray:
    return _impl.xor_bits(
        np.ascontiguousarray(a, dtype=np.uint8), np.ascontiguousarray(b, dtype=np.uint8)
    )


def pick_index(probs, u: float) -> int:
    return int(_impl.pick_index(np.ascontiguousarray(probs, dtype=np.float64), float(u)))
