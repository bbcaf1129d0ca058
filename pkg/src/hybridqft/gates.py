"""Gate families of the hybrid spin-phonon instruction set.

Qubit and mode labels are 0-based register indices.  Every gate is a frozen
dataclass; :func:`apply_gate` applies it with a closed-form or per-mode
strategy, :func:`gate_unitary` builds the same unitary independently as the
matrix exponential of its generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .fock import FockWindow, lowering_matrix, number_matrix, phase_diagonal
from .statespace import RegisterLayout, StateVector, _apply_tensor

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
# columns: sigma^y eigenvectors for eigenvalues +1, -1
_YBASIS = np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2)


def _finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"gate angle must be finite, got {v}")


@dataclass(frozen=True)
class SpinRot:
    """``exp(-i theta (cos(phi) X - sin(phi) Y))`` on one qubit."""
    qubit: int
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        _finite(self.theta, self.phi)


@dataclass(frozen=True)
class ZRot:
    """``exp(-i theta Z)``; ``ZRot(j, pi/4)`` is the phase gate S."""
    qubit: int
    theta: float

    def __post_init__(self):
        _finite(self.theta)


@dataclass(frozen=True)
class MS:
    """Molmer-Sorensen rotation ``exp(-i theta X_j X_k)``."""
    qubit1: int
    qubit2: int
    theta: float

    def __post_init__(self):
        _finite(self.theta)
        if self.qubit1 == self.qubit2:
            raise ValueError("MS gate needs two distinct qubits")


@dataclass(frozen=True)
class SpinPhononMulti:
    """Multi-mode spin-phonon rotation.

    ``exp(-i sum_k theta_k (e^{i phi_k} a_k + e^{-i phi_k} a_k^dag) Y_j)``.
    """
    qubit: int
    modes: tuple[int, ...]
    thetas: tuple[float, ...]
    phis: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
        if not len(self.modes) == len(self.thetas) == len(self.phis):
            raise ValueError("modes, thetas and phis must have equal length")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"repeated modes {self.modes}")
        _finite(*self.thetas, *self.phis)


@dataclass(frozen=True)
class SpinPhononLocal:
    """Single-mode spin-phonon rotation on the local mode of an ion."""
    qubit: int
    mode: int
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        _finite(self.theta, self.phi)


@dataclass(frozen=True)
class PhononSelf:
    """Standing-wave rotation ``exp(-i (chi1 n + chi2 n^2))`` on one mode."""
    mode: int
    chi1: float
    chi2: float

    def __post_init__(self):
        _finite(self.chi1, self.chi2)


@dataclass(frozen=True)
class PhononFrame:
    """Interaction-picture slice ``exp(-i sum_m energy_m n_m duration)``.

    Zero-point constants are dropped, so this is a pure diagonal phase.
    """
    modes: tuple[int, ...]
    energies: tuple[float, ...]
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        if len(self.modes) != len(self.energies):
            raise ValueError("modes and energies must have equal length")
        _finite(self.duration, *self.energies)


Gate = Union[SpinRot, ZRot, MS, SpinPhononMulti, SpinPhononLocal, PhononSelf, PhononFrame]

FAMILIES = {
    SpinRot: "SPINROT",
    ZRot: "ZROT",
    MS: "MS",
    SpinPhononMulti: "SPINPHONON_MULTI",
    SpinPhononLocal: "SPINPHONON_LOCAL",
    PhononSelf: "PHONON_SELF",
    PhononFrame: "PHONON_FRAME",
}


def S(qubit: int) -> ZRot:
    return ZRot(qubit, math.pi / 4)


def Sdg(qubit: int) -> ZRot:
    return ZRot(qubit, -math.pi / 4)


def gate_qubits(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, (SpinRot, ZRot, SpinPhononMulti, SpinPhononLocal)):
        return (gate.qubit,)
    if isinstance(gate, MS):
        return (gate.qubit1, gate.qubit2)
    return ()


def gate_modes(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, (SpinPhononMulti, PhononFrame)):
        return gate.modes
    if isinstance(gate, (SpinPhononLocal, PhononSelf)):
        return (gate.mode,)
    return ()


def gate_axes(gate: Gate, layout: RegisterLayout) -> tuple[int, ...]:
    """Register axes touched by ``gate``, qubits first, in gate order."""
    return (tuple(layout.qubit_axis(q) for q in gate_qubits(gate))
            + tuple(layout.mode_axis(m) for m in gate_modes(gate)))


def is_diagonal(gate: Gate) -> bool:
    return isinstance(gate, (ZRot, PhononSelf, PhononFrame))


def diagonal_factors(gate: Gate, layout: RegisterLayout) -> dict[int, np.ndarray]:
    """Per-axis diagonal phases of a diagonal gate."""
    if isinstance(gate, ZRot):
        return {layout.qubit_axis(gate.qubit):
                np.array([np.exp(-1j * gate.theta), np.exp(1j * gate.theta)])}
    if isinstance(gate, PhononSelf):
        w = layout.mode_windows[gate.mode]
        return {layout.mode_axis(gate.mode): phase_diagonal(w, gate.chi1, gate.chi2)}
    if isinstance(gate, PhononFrame):
        out = {}
        for m, e in zip(gate.modes, gate.energies):
            w = layout.mode_windows[m]
            out[layout.mode_axis(m)] = phase_diagonal(w, e * gate.duration, 0.0)
        return out
    raise TypeError(f"{type(gate).__name__} is not diagonal")


def spin_rotation_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return c * _I2 - 1j * s * (math.cos(phi) * _X - math.sin(phi) * _Y)


@lru_cache(maxsize=256)
def _quadrature_eig(n_min: int, n_max: int, phi: float):
    a = lowering_matrix(FockWindow(n_min, n_max))
    g = np.exp(1j * phi) * a
    g = g + g.conj().T
    return np.linalg.eigh(g)


def displacement_matrix(w: FockWindow, theta: float, phi: float) -> np.ndarray:
    """``exp(-i theta (e^{i phi} a + e^{-i phi} a^dag))`` on the truncated window."""
    evals, evecs = _quadrature_eig(w.n_min, w.n_max, float(phi))
    return (evecs * np.exp(-1j * theta * evals)) @ evecs.conj().T


def _apply_gate_tensor(t: np.ndarray, gate: Gate, layout: RegisterLayout, offset: int = 0) -> np.ndarray:
    """Apply ``gate`` to tensor ``t`` whose register axes start at ``offset``."""
    qa = lambda j: offset + layout.qubit_axis(j)  # noqa: E731
    ma = lambda k: offset + layout.mode_axis(k)  # noqa: E731

    if is_diagonal(gate):
        for axis, vec in diagonal_factors(gate, layout).items():
            shape = [1] * t.ndim
            shape[offset + axis] = vec.shape[0]
            t *= vec.reshape(shape)
        return t
    if isinstance(gate, SpinRot):
        return _apply_tensor(t, spin_rotation_matrix(gate.theta, gate.phi), [qa(gate.qubit)])
    if isinstance(gate, MS):
        c, s = math.cos(gate.theta), math.sin(gate.theta)
        flipped = np.flip(t, axis=(qa(gate.qubit1), qa(gate.qubit2)))
        return c * t - 1j * s * flipped
    if isinstance(gate, (SpinPhononMulti, SpinPhononLocal)):
        if isinstance(gate, SpinPhononLocal):
            modes, thetas, phis = (gate.mode,), (gate.theta,), (gate.phi,)
        else:
            modes, thetas, phis = gate.modes, gate.thetas, gate.phis
        q = qa(gate.qubit)
        t = _apply_tensor(t, _YBASIS.conj().T, [q])
        for s_idx, sign in ((0, 1.0), (1, -1.0)):
            index = [slice(None)] * t.ndim
            index[q] = slice(s_idx, s_idx + 1)
            index = tuple(index)
            block = t[index]
            for m, th, ph in zip(modes, thetas, phis):
                if th == 0.0:
                    continue
                u = displacement_matrix(layout.mode_windows[m], sign * th, ph)
                block = _apply_tensor(block, u, [ma(m)])
            t[index] = block
        return _apply_tensor(t, _YBASIS, [q])
    raise TypeError(f"unknown gate {gate!r}")


def _validate(gate: Gate, layout: RegisterLayout):
    for q in gate_qubits(gate):
        layout.qubit_axis(q)
    for m in gate_modes(gate):
        layout.mode_axis(m)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Multiply ``state`` by the unitary of ``gate`` (in place)."""
    _validate(gate, state.layout)
    view = state.tensor
    t = _apply_gate_tensor(view, gate, state.layout)
    if t is not view:
        state.amplitudes[:] = t.reshape(-1)
    return state


def apply_gates_batch(batch: np.ndarray, gates: Sequence[Gate], layout: RegisterLayout) -> np.ndarray:
    """Apply a gate sequence to every row of ``batch`` (shape ``(B, layout.dim)``)."""
    t = np.array(batch, dtype=np.complex128).reshape((batch.shape[0],) + layout.dims)
    for g in gates:
        _validate(g, layout)
        t = _apply_gate_tensor(t, g, layout, offset=1)
    return t.reshape(batch.shape[0], -1)


def gate_generator(gate: Gate, layout: RegisterLayout) -> np.ndarray:
    """Hermitian ``G`` with ``U = exp(-i G)`` on the axes of :func:`gate_axes`."""
    _validate(gate, layout)

    def ladder(m):
        return lowering_matrix(layout.mode_windows[m])

    if isinstance(gate, SpinRot):
        return gate.theta * (math.cos(gate.phi) * _X - math.sin(gate.phi) * _Y)
    if isinstance(gate, ZRot):
        return gate.theta * _Z
    if isinstance(gate, MS):
        return gate.theta * np.kron(_X, _X)
    if isinstance(gate, (SpinPhononMulti, SpinPhononLocal)):
        if isinstance(gate, SpinPhononLocal):
            modes, thetas, phis = (gate.mode,), (gate.theta,), (gate.phi,)
        else:
            modes, thetas, phis = gate.modes, gate.thetas, gate.phis
        eyes = [np.eye(layout.mode_windows[m].dim) for m in modes]
        total = np.zeros((2 * int(np.prod([e.shape[0] for e in eyes])),) * 2, dtype=complex)
        for i, (m, th, ph) in enumerate(zip(modes, thetas, phis)):
            a = ladder(m)
            quad = np.exp(1j * ph) * a + np.exp(-1j * ph) * a.conj().T
            factors = eyes.copy()
            factors[i] = quad
            op = _Y
            for f in factors:
                op = np.kron(op, f)
            total += th * op
        return total
    if isinstance(gate, PhononSelf):
        n = number_matrix(layout.mode_windows[gate.mode])
        return gate.chi1 * n + gate.chi2 * n @ n
    if isinstance(gate, PhononFrame):
        eyes = [np.eye(layout.mode_windows[m].dim) for m in gate.modes]
        total = np.zeros((int(np.prod([e.shape[0] for e in eyes])),) * 2)
        for i, (m, e) in enumerate(zip(gate.modes, gate.energies)):
            factors = eyes.copy()
            factors[i] = number_matrix(layout.mode_windows[m])
            op = np.ones((1, 1))
            for f in factors:
                op = np.kron(op, f)
            total += e * gate.duration * op
        return total.astype(complex)
    raise TypeError(f"unknown gate {gate!r}")


def gate_unitary(gate: Gate, layout: RegisterLayout, max_dim: int = 4096) -> np.ndarray:
    """Dense unitary of ``gate`` on its own axes (see :func:`gate_axes`)."""
    axes = gate_axes(gate, layout)
    d = int(np.prod([layout.dims[a] for a in axes]))
    if d > max_dim:
        raise ValueError(f"gate acts on a {d}-dimensional subspace (limit {max_dim})")
    return scipy.linalg.expm(-1j * gate_generator(gate, layout))


# text dump -----------------------------------------------------------------

def _f(x: float) -> str:
    return f"{x:.17g}"


def _join(values, fmt=_f) -> str:
    return ",".join(fmt(v) for v in values)


def format_gate(gate: Gate) -> str:
    """One-line text form ``FAMILY target(s) angles...`` (radians, 17 digits)."""
    name = FAMILIES[type(gate)]
    if isinstance(gate, SpinRot):
        return f"{name} q{gate.qubit} {_f(gate.theta)} {_f(gate.phi)}"
    if isinstance(gate, ZRot):
        return f"{name} q{gate.qubit} {_f(gate.theta)}"
    if isinstance(gate, MS):
        return f"{name} q{gate.qubit1} q{gate.qubit2} {_f(gate.theta)}"
    if isinstance(gate, SpinPhononMulti):
        modes = ",".join(f"m{m}" for m in gate.modes)
        return f"{name} q{gate.qubit} {modes} {_join(gate.thetas)} {_join(gate.phis)}"
    if isinstance(gate, SpinPhononLocal):
        return f"{name} q{gate.qubit} m{gate.mode} {_f(gate.theta)} {_f(gate.phi)}"
    if isinstance(gate, PhononSelf):
        return f"{name} m{gate.mode} {_f(gate.chi1)} {_f(gate.chi2)}"
    if isinstance(gate, PhononFrame):
        modes = ",".join(f"m{m}" for m in gate.modes)
        return f"{name} {modes} {_f(gate.duration)} {_join(gate.energies)}"
    raise TypeError(f"unknown gate {gate!r}")


def parse_gate(line: str) -> Gate:
    tok = line.split()
    if not tok:
        raise ValueError("empty gate line")
    name, args = tok[0], tok[1:]

    def label(s, prefix):
        if not s.startswith(prefix):
            raise ValueError(f"expected {prefix}<index>, got {s!r} in {line!r}")
        return int(s[len(prefix):])

    def labels(s, prefix):
        return tuple(label(x, prefix) for x in s.split(","))

    def floats(s):
        return tuple(float(x) for x in s.split(","))

    try:
        if name == "SPINROT":
            return SpinRot(label(args[0], "q"), float(args[1]), float(args[2]))
        if name == "ZROT":
            return ZRot(label(args[0], "q"), float(args[1]))
        if name == "MS":
            return MS(label(args[0], "q"), label(args[1], "q"), float(args[2]))
        if name == "SPINPHONON_MULTI":
            return SpinPhononMulti(label(args[0], "q"), labels(args[1], "m"),
                                   floats(args[2]), floats(args[3]))
        if name == "SPINPHONON_LOCAL":
            return SpinPhononLocal(label(args[0], "q"), label(args[1], "m"),
                                   float(args[2]), float(args[3]))
        if name == "PHONON_SELF":
            return PhononSelf(label(args[0], "m"), float(args[1]), float(args[2]))
        if name == "PHONON_FRAME":
            return PhononFrame(labels(args[0], "m"), floats(args[2]), float(args[1]))
    except IndexError:
        raise ValueError(f"too few fields in {line!r}") from None
    raise ValueError(f"unknown gate family {name!r}")
