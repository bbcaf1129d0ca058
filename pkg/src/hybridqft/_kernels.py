"""In-place numba kernels for large state vectors.

All kernels take the flat amplitude array plus the register shape and never
allocate a second full-size buffer.
"""
from __future__ import annotations

import numba
import numpy as np

_CHUNK = 4096


def _strides(dims):
    strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    return strides


def local_plan(dims, targets):
    """Offsets of the target sub-block and the radix of the remaining axes."""
    dims = np.asarray(dims, dtype=np.int64)
    strides = _strides(dims)
    targets = np.asarray(targets, dtype=np.int64)
    tdims = dims[targets]
    d_local = int(np.prod(tdims))
    offsets = np.zeros(d_local, dtype=np.int64)
    for loc in range(d_local):
        rem = loc
        off = 0
        for t in range(len(targets) - 1, -1, -1):
            off += (rem % tdims[t]) * strides[targets[t]]
            rem //= tdims[t]
        offsets[loc] = off
    rest = np.array([k for k in range(len(dims)) if k not in set(targets.tolist())], dtype=np.int64)
    return offsets, dims[rest].copy(), strides[rest].copy()


@numba.njit(parallel=True, cache=True)
def _apply_sparse_local(psi, offsets, rest_dims, rest_strides, indptr, indices, data):
    d_local = offsets.shape[0]
    n_outer = psi.shape[0] // d_local
    n_chunks = (n_outer + _CHUNK - 1) // _CHUNK
    n_rest = rest_dims.shape[0]
    for c in numba.prange(n_chunks):
        buf = np.empty(d_local, dtype=np.complex128)
        start = c * _CHUNK
        stop = min(start + _CHUNK, n_outer)
        for o in range(start, stop):
            rem = o
            base = 0
            for k in range(n_rest - 1, -1, -1):
                base += (rem % rest_dims[k]) * rest_strides[k]
                rem //= rest_dims[k]
            for loc in range(d_local):
                buf[loc] = psi[base + offsets[loc]]
            for r in range(d_local):
                acc = 0j
                for p in range(indptr[r], indptr[r + 1]):
                    acc += data[p] * buf[indices[p]]
                psi[base + offsets[r]] = acc


def apply_local_inplace(psi, dims, op, targets, drop_tol=0.0):
    """Multiply ``op`` into ``psi`` on ``targets``; zeros of ``op`` are skipped."""
    offsets, rest_dims, rest_strides = local_plan(dims, targets)
    op = np.asarray(op, dtype=np.complex128)
    mask = np.abs(op) > drop_tol
    indptr = np.zeros(op.shape[0] + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(mask.sum(axis=1))
    rows, cols = np.nonzero(mask)
    _apply_sparse_local(psi, offsets, rest_dims, rest_strides, indptr,
                        cols.astype(np.int64), op[rows, cols].copy())


@numba.njit(parallel=True, cache=True)
def _marginals(psi, n_lo, hi_digits, lo_digits, groups, sizes, block, out):
    n_hi = hi_digits.shape[0]
    n_groups = groups.shape[0]
    width = groups.shape[1]
    n_hi_axes = hi_digits.shape[1]
    partial = np.zeros((n_hi, out.shape[0]), dtype=np.float64)
    for h in numba.prange(n_hi):
        digits = np.empty(n_hi_axes + lo_digits.shape[1], dtype=np.int64)
        for k in range(n_hi_axes):
            digits[k] = hi_digits[h, k]
        base = h * n_lo
        for l in range(n_lo):
            v = psi[base + l]
            p = v.real * v.real + v.imag * v.imag
            if p == 0.0:
                continue
            for k in range(lo_digits.shape[1]):
                digits[n_hi_axes + k] = lo_digits[l, k]
            for g in range(n_groups):
                flat = 0
                for s in range(width):
                    ax = groups[g, s]
                    if ax >= 0:
                        flat = flat * sizes[g, s] + digits[ax]
                partial[h, g * block + flat] += p
    for h in range(n_hi):
        for k in range(out.shape[0]):
            out[k] += partial[h, k]


def _digit_table(dims):
    if len(dims) == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(dims).reshape(len(dims), -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


def marginals(psi, dims, groups):
    """Marginal probability tables of ``|psi|^2`` for several axis groups in one pass.

    ``groups`` is a list of axis tuples; returns one array per group with the
    shape of those axes.
    """
    dims = [int(d) for d in dims]
    total = float(np.prod(dims, dtype=float))
    split, acc = 0, 1.0
    while split < len(dims) and acc * dims[split] <= np.sqrt(total) * 4:
        acc *= dims[split]
        split += 1
    hi = _digit_table(dims[:split])
    lo = _digit_table(dims[split:])
    width = max(len(g) for g in groups)
    garr = -np.ones((len(groups), width), dtype=np.int64)
    sizes = np.ones((len(groups), width), dtype=np.int64)
    block = max(int(np.prod([dims[a] for a in g])) for g in groups)
    for i, g in enumerate(groups):
        garr[i, :len(g)] = g
        sizes[i, :len(g)] = [dims[a] for a in g]
    out = np.zeros(block * len(groups), dtype=np.float64)
    _marginals(psi, lo.shape[0], hi, lo, garr, sizes, block, out)
    tables = out.reshape(len(groups), block)
    return [tables[i, :int(np.prod([dims[a] for a in g]))].reshape([dims[a] for a in g])
            for i, g in enumerate(groups)]
