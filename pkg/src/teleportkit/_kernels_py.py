"""Pure numpy versions of the compiled kernels, used when the extension is absent."""

from __future__ import annotations

import numpy as np


def apply_matrix(state: np.ndarray, n: int, mat: np.ndarray, qubits: np.ndarray) -> np.ndarray:
    qubits = [int(q) for q in qubits]
    k = len(qubits)
    if mat.shape != (1 << k, 1 << k):
        raise ValueError("matrix shape does not match target count")
    psi = np.asarray(state, dtype=np.complex128).reshape((2,) * n)
    psi = np.moveaxis(psi, qubits, range(k))
    rest = psi.shape[k:]
    psi = (mat @ psi.reshape(1 << k, -1)).reshape((2,) * k + rest)
    return np.ascontiguousarray(np.moveaxis(psi, range(k), qubits)).reshape(-1)


def xor_bits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) != len(b):
        raise ValueError("bit arrays differ in length")
    return np.bitwise_xor(a, b).astype(np.uint8) & 1


def pick_index(probs: np.ndarray, u: float) -> int:
    probs = np.asarray(probs, dtype=float)
    positive = np.flatnonzero(probs > 0.0)
    if positive.size == 0:
        raise ValueError("no outcome has positive probability")
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc and p > 0.0:
            return i
    return int(positive[-1])
