"""Composite qubit-mode registers and state vectors.

Index convention: the flat amplitude index is the C-order ravel of the tensor
with shape ``(2,)*n_qubits + (d_0, d_1, ...)``.  Qubit 0 is the most
significant axis, modes follow qubits in ascending label.  Qubit value 0 is
spin up (``sigma^z = +1``).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import FockWindow

UP, DOWN = 0, 1

# memory guard for a single amplitude array (bytes)
MAX_STATE_BYTES = 8 * 2**30

_DUMP_MAGIC = b"HQSV"
_DUMP_VERSION = 1


@dataclass(frozen=True)
class RegisterLayout:
    n_qubits: int
    mode_windows: tuple[FockWindow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "mode_windows", tuple(self.mode_windows))
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be >= 0")

    @property
    def n_modes(self) -> int:
        return len(self.mode_windows)

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits + tuple(w.dim for w in self.mode_windows)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=object)) if self.dims else 1

    def qubit_axis(self, j: int) -> int:
        if not 0 <= j < self.n_qubits:
            raise IndexError(f"qubit {j} out of range for {self.n_qubits} qubits")
        return j

    def mode_axis(self, k: int) -> int:
        if not 0 <= k < self.n_modes:
            raise IndexError(f"mode {k} out of range for {self.n_modes} modes")
        return self.n_qubits + k

    def index(self, qubit_bits: Sequence[int], mode_occupations: Sequence[int]) -> int:
        if len(qubit_bits) != self.n_qubits or len(mode_occupations) != self.n_modes:
            raise ValueError(
                f"expected {self.n_qubits} qubit bits and {self.n_modes} occupations, "
                f"got {len(qubit_bits)} and {len(mode_occupations)}")
        digits = []
        for j, b in enumerate(qubit_bits):
            if b not in (0, 1):
                raise ValueError(f"qubit {j}: bit must be 0 or 1, got {b}")
            digits.append(int(b))
        for k, (n, w) in enumerate(zip(mode_occupations, self.mode_windows)):
            if not w.n_min <= n <= w.n_max:
                raise ValueError(
                    f"mode {k}: occupation {n} outside window [{w.n_min}, {w.n_max}]")
            digits.append(int(n) - w.n_min)
        return int(np.ravel_multi_index(digits, self.dims))

    def unravel(self, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        digits = np.unravel_index(index, self.dims)
        bits = tuple(int(d) for d in digits[: self.n_qubits])
        occ = tuple(int(d) + w.n_min for d, w in zip(digits[self.n_qubits:], self.mode_windows))
        return bits, occ


class StateVector:
    """Dense complex amplitudes over a :class:`RegisterLayout`."""

    def __init__(self, layout: RegisterLayout, amplitudes: np.ndarray | None = None):
        self.layout = layout
        if amplitudes is None:
            # layouts may describe registers far too large to hold; only allocation is capped
            if layout.dim * 16 > MAX_STATE_BYTES:
                raise MemoryError(
                    f"register dimension {layout.dim} needs {layout.dim * 16 / 2**30:.1f} GiB "
                    f"(limit {MAX_STATE_BYTES / 2**30:.0f} GiB)")
            amplitudes = np.zeros(layout.dim, dtype=np.complex128)
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape[0] != layout.dim:
            raise ValueError(f"got {amplitudes.shape[0]} amplitudes for dimension {layout.dim}")
        self.amplitudes = amplitudes

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return (self.amplitudes.real ** 2 + self.amplitudes.imag ** 2).reshape(self.layout.dims)

    def __repr__(self):
        return f"StateVector(dim={self.layout.dim}, norm={self.norm():.12f})"


def basis_state(layout: RegisterLayout, qubit_bits: Sequence[int],
                mode_occupations: Sequence[int]) -> StateVector:
    state = StateVector(layout)
    state.amplitudes[layout.index(qubit_bits, mode_occupations)] = 1.0
    return state


def inner_product(s1: StateVector, s2: StateVector) -> complex:
    """``<s1|s2>``, conjugate-linear in ``s1``."""
    if s1.layout != s2.layout:
        raise ValueError("states live on different layouts")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def _apply_tensor(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Return ``op`` applied on ``axes`` of ``tensor`` (reference numpy path).

    ``op`` acts on the product space of ``axes`` in the listed order, first
    axis most significant.  Leading batch axes are allowed as long as
    ``axes`` are counted from the end-aligned register shape by the caller.
    """
    axes = list(axes)
    tdims = [tensor.shape[a] for a in axes]
    op_t = op.reshape(tdims + tdims)
    k = len(axes)
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_local(state: StateVector, op: np.ndarray, targets: Sequence[int], *,
                check_unitary: bool = False, backend: str = "auto") -> StateVector:
    """Apply ``op`` to the register axes ``targets``, identity elsewhere.

    ``backend`` is ``"numpy"`` (tensordot reference), ``"numba"`` (in-place
    kernel, no second full-size buffer) or ``"auto"`` (numba above 2**16
    amplitudes).
    """
    targets = [int(t) for t in targets]
    dims = state.layout.dims
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target axes {targets}")
    for t in targets:
        if not 0 <= t < len(dims):
            raise IndexError(f"axis {t} out of range for {len(dims)} axes")
    d = int(np.prod([dims[t] for t in targets]))
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {d}")
    if not np.all(np.isfinite(op)):
        raise ValueError("operator has non-finite entries")
    if check_unitary:
        err = np.abs(op.conj().T @ op - np.eye(d)).max()
        if err > 1e-12:
            raise ValueError(f"operator not unitary (max deviation {err:.2e})")
    if backend == "auto":
        backend = "numba" if state.layout.dim > 2**16 else "numpy"
    if backend == "numba":
        from ._kernels import apply_local_inplace
        apply_local_inplace(state.amplitudes, dims, op, targets)
    elif backend == "numpy":
        state.amplitudes[:] = _apply_tensor(state.tensor, op, targets).reshape(-1)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if not np.all(np.isfinite(state.amplitudes[:: max(1, state.layout.dim // 4096)])):
        raise FloatingPointError("non-finite amplitudes after operator application")
    return state


def apply_diagonal(state: StateVector, phases: dict[int, np.ndarray]) -> StateVector:
    """Multiply by a product of per-axis diagonals, in place.

    The factors are folded into two vectors over a leading and a trailing
    block of axes so large states are swept at most twice.
    """
    dims = state.layout.dims
    if not phases:
        return state
    split = _split_point(dims)
    left = _outer_vector(dims[:split], {a: v for a, v in phases.items() if a < split}, 0)
    right = _outer_vector(dims[split:], {a: v for a, v in phases.items() if a >= split}, split)
    view = state.amplitudes.reshape(left.shape[0], right.shape[0])
    if not np.all(left == 1):
        view *= left[:, None]
    if not np.all(right == 1):
        view *= right[None, :]
    return state


def _split_point(dims):
    total = float(np.prod(dims, dtype=float))
    acc = 1.0
    for k, d in enumerate(dims):
        if acc * d > np.sqrt(total):
            return k if k > 0 else 1
        acc *= d
    return len(dims)


def _outer_vector(dims, phases, offset):
    vec = np.ones(1, dtype=np.complex128)
    for k, d in enumerate(dims):
        v = phases.get(k + offset)
        if v is None:
            vec = np.repeat(vec, d)
        else:
            v = np.asarray(v, dtype=np.complex128)
            if v.shape != (d,):
                raise ValueError(f"diagonal for axis {k + offset} has shape {v.shape}, expected ({d},)")
            vec = np.multiply.outer(vec, v).reshape(-1)
    return vec


def dump_state(state: StateVector, path) -> None:
    """Write ``state`` as little-endian (re, im) float64 pairs behind a 16-byte header."""
    header = _DUMP_MAGIC + struct.pack("<IQ", _DUMP_VERSION, state.layout.dim)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(state.amplitudes.astype("<c16").tobytes())


def load_state(path, layout: RegisterLayout) -> StateVector:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _DUMP_MAGIC:
            raise ValueError(f"{path}: not a state dump")
        version, dim = struct.unpack("<IQ", header[4:])
        if version != _DUMP_VERSION:
            raise ValueError(f"{path}: unsupported dump version {version}")
        if dim != layout.dim:
            raise ValueError(f"{path}: dimension {dim} does not match layout ({layout.dim})")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.shape[0] != dim:
        raise ValueError(f"{path}: truncated payload ({data.shape[0]} of {dim} amplitudes)")
    return StateVector(layout, data.astype(np.complex128))
