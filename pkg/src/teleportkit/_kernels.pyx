# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for small dense registers.

Qubit ``q`` of an ``n``-qubit register sits at bit ``n - 1 - q`` of the
basis index, so the first label is the most significant bit.
"""
import numpy as np


def apply_matrix(const double complex[::1] state, int n,
                 const double complex[:, ::1] mat, const int[::1] qubits):
    """Return ``mat`` applied to ``qubits`` of ``state`` (identity elsewhere)."""
    cdef int k = qubits.shape[0]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef int sub = 1 << k
    cdef Py_ssize_t[16] offsets
    cdef double complex[16] buf
    cdef Py_ssize_t target_mask = 0, base, idx
    cdef int j, t, r
    cdef double complex acc

    if k > 4 or mat.shape[0] != sub or mat.shape[1] != sub:
        raise ValueError("matrix shape does not match target count")

    for t in range(k):
        target_mask |= (<Py_ssize_t>1) << (n - 1 - qubits[t])
    for j in range(sub):
        idx = 0
        for t in range(k):
            if (j >> (k - 1 - t)) & 1:
                idx |= (<Py_ssize_t>1) << (n - 1 - qubits[t])
        offsets[j] = idx

    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] res = out
    for base in range(dim):
        if base & target_mask:
            continue
        for j in range(sub):
            buf[j] = state[base | offsets[j]]
        for r in range(sub):
            acc = 0
            for j in range(sub):
                acc = acc + mat[r, j] * buf[j]
            res[base | offsets[r]] = acc
    return out


def xor_bits(const unsigned char[::1] a, const unsigned char[::1] b):
    """Elementwise parity of two equal-length 0/1 arrays."""
    cdef Py_ssize_t i, m = a.shape[0]
    if b.shape[0] != m:
        raise ValueError("bit arrays differ in length")
    out = np.empty(m, dtype=np.uint8)
    cdef unsigned char[::1] res = out
    for i in range(m):
        res[i] = (a[i] ^ b[i]) & 1
    return out


def pick_index(const double[::1] probs, double u):
    """Index ``i`` with ``cumsum(probs)[i-1] <= u < cumsum(probs)[i]``.

    Falls back to the last nonzero entry when rounding leaves ``u`` past the
    total mass.
    """
    cdef Py_ssize_t i, m = probs.shape[0], last = -1
    cdef double acc = 0.0
    for i in range(m):
        if probs[i] > 0.0:
            last = i
        acc += probs[i]
        if u < acc and probs[i] > 0.0:
            return i
    if last < 0:
        raise ValueError("no outcome has positive probability")
    return last
