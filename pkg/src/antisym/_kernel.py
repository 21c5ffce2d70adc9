"""In-place tensor kernels shared by the state-vector and density simulators.

A state of ``m`` qubits is an ndarray of shape ``(2,)*m`` (optionally with
trailing batch axes).  Callers decide which tensor axis belongs to which
wire; the kernels only see axis numbers.
"""

from __future__ import annotations

import numba
import numpy as np
from scipy.sparse import csr_matrix

# the bundled TBB is too old for numba; OpenMP avoids a warning on first use
numba.config.THREADING_LAYER = "omp"


def _sub(t, control_axes, control_values, target_axes):
    if not control_axes:
        return t, list(target_axes)
    idx = [slice(None)] * t.ndim
    for a, v in zip(control_axes, control_values):
        idx[a] = v
    sub = t[tuple(idx)]
    shifted = [a - sum(c < a for c in control_axes) for a in target_axes]
    return sub, shifted


def apply_matrix(t, mat, target_axes, control_axes=(), control_values=()):
    """Apply ``mat`` to ``target_axes`` of ``t`` in place.

    ``mat`` uses the first target axis as its least significant bit.  The
    update is restricted to the slice where each control axis holds its
    control value.
    """
    sub, tax = _sub(t, control_axes, control_values, target_axes)
    if len(tax) == 1:
        _apply_1q(sub, mat, tax[0])
        return t
    k = len(tax)
    m = np.asarray(mat).reshape((2,) * (2 * k))
    in_axes = list(range(k, 2 * k))
    sub_axes = tax[::-1]
    out = np.tensordot(m, sub, axes=(in_axes, sub_axes))
    out = np.moveaxis(out, list(range(k)), sub_axes)
    sub[...] = out
    return t


def _apply_1q(sub, m, axis):
    i0 = [slice(None)] * sub.ndim
    i1 = list(i0)
    # length-1 slices keep views even when ``sub`` is one-dimensional
    i0[axis] = slice(0, 1)
    i1[axis] = slice(1, 2)
    x0 = sub[tuple(i0)]
    x1 = sub[tuple(i1)]
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if m01 == 0 and m10 == 0:
        if m00 != 1:
            x0 *= m00
        if m11 != 1:
            x1 *= m11
    elif m00 == 0 and m11 == 0:
        tmp = x0.copy()
        x0[...] = x1
        if m01 != 1:
            x0 *= m01
        x1[...] = tmp
        if m10 != 1:
            x1 *= m10
    else:
        tmp = x0.copy()
        x0 *= m00
        x0 += m01 * x1
        x1 *= m11
        x1 += m10 * tmp


def project(t, axis, value):
    """Zero the slice where ``axis`` differs from ``value`` (in place)."""
    idx = [slice(None)] * t.ndim
    idx[axis] = 1 - value
    t[tuple(idx)] = 0
    return t


# -- fused superoperator kernel ----------------------------------------------------


_CHUNK = 4096


@numba.njit(cache=True, parallel=True)
def _sparse_kernel(flat, offsets, zero_bits, indptr, indices, data):
    n_groups = flat.size >> zero_bits.size
    dim = offsets.size
    n_chunks = (n_groups + _CHUNK - 1) // _CHUNK
    for ch in numba.prange(n_chunks):
        tmp = np.empty(dim, dtype=flat.dtype)
        lo = ch * _CHUNK
        hi = min(n_groups, lo + _CHUNK)
        for i in range(lo, hi):
            base = i
            for b in zero_bits:  # ascending: open a zero at each bit position
                low = base & ((1 << b) - 1)
                base = ((base >> b) << (b + 1)) | low
            for m in range(dim):
                tmp[m] = flat[base + offsets[m]]
            for m in range(dim):
                acc = 0j
                for q in range(indptr[m], indptr[m + 1]):
                    acc += data[q] * tmp[indices[q]]
                flat[base + offsets[m]] = acc


def set_threads(n: int) -> None:
    """Number of threads used by the superoperator kernel."""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def apply_sparse(t: np.ndarray, bits, matrix) -> np.ndarray:
    """Apply ``matrix`` in place to the flat-index ``bits`` of a C-contiguous tensor.

    Matrix index bit ``j`` corresponds to flat bit ``bits[j]`` (bit 0 is the
    last axis).  Zero entries of ``matrix`` are skipped.
    """
    if not t.flags.c_contiguous:
        raise ValueError("apply_sparse needs a C-contiguous tensor")
    bits = np.asarray(bits, dtype=np.int64)
    m = csr_matrix(np.asarray(matrix, dtype=complex))
    m.eliminate_zeros()
    dim = 1 << bits.size
    offsets = np.zeros(dim, dtype=np.int64)
    for j, b in enumerate(bits):
        offsets[(np.arange(dim) >> j) & 1 == 1] += 1 << int(b)
    _sparse_kernel(
        t.reshape(-1),
        offsets,
        np.sort(bits),
        m.indptr.astype(np.int64),
        m.indices.astype(np.int64),
        m.data.astype(complex),
    )
    return t
