"""Exact and Trotterized time evolution with observable extraction."""
from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .circuits import Circuit
from .gates import (MS, Gate, PhononFrame, PhononSelf, SpinPhononLocal, SpinPhononMulti,
                    SpinRot, ZRot, apply_gate, apply_gates_batch, diagonal_factors, gate_axes,
                    gate_modes, gate_qubits, is_diagonal)
from .models import Hamiltonian, SchwingerParams, gauss_local
from .statespace import RegisterLayout, StateVector, apply_diagonal, apply_local

DENSE_CAP = 4096
# registers above this size use gate fusion and the in-place kernels
FUSE_THRESHOLD = 2**16
ZERO_TOL = 1e-15
CSV_HEADER = ("t", "echo", "mean_boson", "gauss_violation", "norm")


class KrylovError(RuntimeError):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    echo: np.ndarray
    mean_boson: np.ndarray
    norm: np.ndarray
    gauss_violation: np.ndarray | None = None
    states: list[StateVector] | None = field(default=None, repr=False)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size and (self.times[0] != 0 or np.any(np.diff(self.times) <= 0)):
            raise ValueError("sample times must start at 0 and increase strictly")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i, t in enumerate(self.times):
            gv = "" if self.gauss_violation is None else repr(float(self.gauss_violation[i]))
            w.writerow([repr(float(t)), repr(float(self.echo[i])), repr(float(self.mean_boson[i])),
                        gv, repr(float(self.norm[i]))])
        return buf.getvalue()


# observables ----------------------------------------------------------------

class Observer:
    """Computes echo, mean boson number, Gauss violation and norm of a state.

    ``boson="relative"`` subtracts the reference occupation ``M`` of the
    Schwinger links from the mean boson number.
    """

    def __init__(self, params, reference: StateVector, boson: str = "absolute"):
        if boson not in ("absolute", "relative"):
            raise ValueError(f"boson reporting must be 'absolute' or 'relative', got {boson!r}")
        self.params = params
        self.reference = reference
        self.boson = boson
        nz = np.flatnonzero(reference.amplitudes)
        self._basis = int(nz[0]) if nz.size == 1 else None
        self._ref_amp = reference.amplitudes[nz[0]] if nz.size == 1 else None

    def echo(self, state: StateVector) -> float:
        if self._basis is not None:
            ov = np.conj(self._ref_amp) * state.amplitudes[self._basis]
        else:
            ov = np.vdot(self.reference.amplitudes, state.amplitudes)
        return float(abs(ov) ** 2)

    def _groups(self, layout: RegisterLayout):
        p = self.params
        if isinstance(p, SchwingerParams):
            return [(layout.qubit_axis(j), layout.mode_axis((j - 1) % p.N), layout.mode_axis(j))
                    for j in range(p.N)]
        return [(layout.mode_axis(m),) for m in range(layout.n_modes)]

    def marginals(self, state: StateVector) -> list[np.ndarray]:
        groups = self._groups(state.layout)
        if state.layout.dim > FUSE_THRESHOLD:
            from ._kernels import marginals
            return marginals(state.amplitudes, state.layout.dims, groups)
        prob = state.probabilities()
        out = []
        for g in groups:
            rest = tuple(a for a in range(prob.ndim) if a not in g)
            m = prob.sum(axis=rest)
            # sum keeps axes in ascending order; reorder to the group's order
            order = np.argsort(np.argsort(g))
            out.append(np.transpose(m, order) if len(g) > 1 else m)
        return out

    def gauss_moments(self, state: StateVector) -> tuple[np.ndarray, np.ndarray]:
        """``<G_j>`` and ``<G_j^2>`` for every site (Schwinger only)."""
        p = self.params
        if not isinstance(p, SchwingerParams):
            raise TypeError("Gauss law is defined for the Schwinger model only")
        tables = self.marginals(state)
        norm2 = float(sum(tables[0].ravel()))
        g1, g2 = [], []
        for j, tab in enumerate(tables):
            gl = gauss_local(p, j)
            g1.append(float((tab * gl).sum()) / norm2)
            g2.append(float((tab * gl ** 2).sum()) / norm2)
        return np.array(g1), np.array(g2)

    def __call__(self, state: StateVector) -> dict:
        p = self.params
        norm = state.norm()
        tables = self.marginals(state)
        layout = state.layout
        occ = [w.occupations for w in layout.mode_windows]
        out = {"echo": self.echo(state), "norm": norm, "gauss_violation": None}
        if isinstance(p, SchwingerParams):
            # link j is the last axis of group j
            nbar = [float((tab.sum(axis=(0, 1)) * occ[j]).sum()) for j, tab in enumerate(tables)]
            gl2 = [float((tab * gauss_local(p, j) ** 2).sum()) for j, tab in enumerate(tables)]
            out["gauss_violation"] = sum(gl2) / norm ** 2
        else:
            nbar = [float((tab * occ[m]).sum()) for m, tab in enumerate(tables)]
        mean = sum(nbar) / (norm ** 2 * len(nbar))
        if self.boson == "relative" and isinstance(p, SchwingerParams):
            mean -= p.M
        out["mean_boson"] = mean
        return out


def _collect(observer, states, times, keep_states, info):
    rows = [observer(s) for s in states] if observer is not None else None
    if rows is None:
        nan = np.full(len(times), np.nan)
        norms = np.array([s.norm() for s in states])
        return Trajectory(times, nan, nan.copy(), norms, None,
                          list(states) if keep_states else None, info)
    gv = None if rows[0]["gauss_violation"] is None else np.array([r["gauss_violation"] for r in rows])
    return Trajectory(times, np.array([r["echo"] for r in rows]),
                      np.array([r["mean_boson"] for r in rows]),
                      np.array([r["norm"] for r in rows]), gv,
                      list(states) if keep_states else None, info)


# exact evolution --------------------------------------------------------------

def reachable_sector(H: sp.spmatrix, psi0: np.ndarray) -> np.ndarray:
    """Basis indices connected to the support of ``psi0`` through nonzeros of ``H``.

    The exponential of ``H`` never leaves this set, so evolving inside it is
    exact.
    """
    pattern = sp.csr_matrix(H)
    pattern = sp.csr_matrix((np.ones(pattern.nnz), pattern.indices, pattern.indptr),
                            shape=pattern.shape)
    _, labels = connected_components(pattern, directed=False)
    seeds = np.unique(labels[np.flatnonzero(psi0)])
    return np.flatnonzero(np.isin(labels, seeds))


def lanczos_expm(H, v: np.ndarray, t: float, *, tol: float = 1e-10, m_max: int = 40,
                 substep_min: float = 1e-12, max_substeps: int = 100_000) -> tuple[np.ndarray, dict]:
    """``exp(-i H t) v`` by Lanczos with adaptive substeps.

    Each substep builds a Krylov basis of at most ``m_max`` vectors (full
    reorthogonalization) and accepts the step when the a posteriori estimate
    ``beta_m |e_m^T exp(-i tau T) e_1| ||v||`` is below ``tol``.  More than
    ``max_substeps`` accepted substeps counts as non-convergence.
    """
    w = np.array(v, dtype=np.complex128)
    done, tau = 0.0, t
    n_sub, worst = 0, 0.0
    while done < t:
        tau = min(tau, t - done)
        beta0 = np.linalg.norm(w)
        if beta0 == 0:
            break
        V = np.empty((m_max + 1, w.shape[0]), dtype=np.complex128)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        V[0] = w / beta0
        m = m_max
        for k in range(m_max):
            u = H @ V[k]
            alpha[k] = np.vdot(V[k], u).real
            u -= V[: k + 1].T @ (V[: k + 1].conj() @ u)
            u -= V[: k + 1].T @ (V[: k + 1].conj() @ u)
            beta[k] = np.linalg.norm(u)
            if beta[k] < 1e-13 * beta0:
                m = k + 1
                break
            V[k + 1] = u / beta[k]
        T = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        evals, evecs = la.eigh(T)
        while True:
            c = evecs @ (np.exp(-1j * tau * evals) * evecs[0].conj())
            happy = m < m_max or beta[m - 1] < 1e-13 * beta0
            err = 0.0 if happy else beta[m - 1] * abs(c[m - 1]) * beta0
            if err <= tol:
                break
            tau *= 0.5
            if tau < substep_min * max(t, 1.0):
                raise KrylovError(f"Lanczos substep fell below {substep_min:g} "
                                  f"(residual estimate {err:.3e} > tol {tol:.1e})")
        w = beta0 * (V[:m].T @ c)
        done += tau
        n_sub += 1
        worst = max(worst, err)
        if n_sub >= max_substeps and done < t:
            raise KrylovError(f"Lanczos needed more than {max_substeps} substeps "
                              f"(reached t={done:.3e} of {t:.3e}, residual estimate {worst:.3e})")
        tau *= 2.0
    return w, {"substeps": n_sub, "max_residual": worst}


def exact_evolve(H, psi0: StateVector, times: Sequence[float], observer: Observer | None = None,
                 *, method: str = "auto", sector: bool = True, dense_cap: int = DENSE_CAP,
                 tol: float = 1e-10, m_max: int = 40, keep_states: bool = False) -> Trajectory:
    """Sample ``exp(-i H t) psi0`` at ``times``.

    ``method`` is ``"dense"`` (Hermitian eigendecomposition), ``"krylov"``
    (Lanczos stepping between sample times) or ``"auto"``: dense when the
    evolved space is at most ``dense_cap``.  With ``sector`` the evolution is
    restricted to the basis states reachable from ``psi0``.
    """
    if isinstance(H, Hamiltonian):
        H = H.total()
    H = sp.csr_matrix(H)
    layout = psi0.layout
    if H.shape != (layout.dim, layout.dim):
        raise ValueError(f"Hamiltonian shape {H.shape} does not match state dimension {layout.dim}")
    times = np.asarray(times, dtype=float)
    idx = reachable_sector(H, psi0.amplitudes) if sector else np.arange(layout.dim)
    Hs = H[idx][:, idx] if idx.size < layout.dim else H
    v0 = psi0.amplitudes[idx]
    if method == "auto":
        method = "dense" if idx.size <= dense_cap else "krylov"
    info = {"method": method, "evolved_dim": int(idx.size)}
    sub = []
    if method == "dense":
        evals, evecs = la.eigh(Hs.toarray())
        coef = evecs.conj().T @ v0
        for t in times:
            sub.append(evecs @ (np.exp(-1j * evals * t) * coef))
    elif method == "krylov":
        w, last = v0.copy(), 0.0
        worst = 0.0
        for t in times:
            if t > last:
                w, kinfo = lanczos_expm(Hs, w, t - last, tol=tol, m_max=m_max)
                worst = max(worst, kinfo["max_residual"])
                last = t
            sub.append(w.copy())
        info["max_residual"] = worst
    else:
        raise ValueError(f"unknown method {method!r}")
    states = []
    for w in sub:
        s = StateVector(layout)
        s.amplitudes[idx] = w
        states.append(s)
    return _collect(observer, states, times, keep_states, info)


# gate fusion ---------------------------------------------------------------

def _remap(gate: Gate, qmap: dict, mmap: dict) -> Gate:
    if isinstance(gate, (SpinRot, ZRot, SpinPhononMulti)):
        kw = {"qubit": qmap[gate.qubit]}
        if isinstance(gate, SpinPhononMulti):
            kw["modes"] = tuple(mmap[m] for m in gate.modes)
        return dataclasses.replace(gate, **kw)
    if isinstance(gate, MS):
        return dataclasses.replace(gate, qubit1=qmap[gate.qubit1], qubit2=qmap[gate.qubit2])
    if isinstance(gate, SpinPhononLocal):
        return dataclasses.replace(gate, qubit=qmap[gate.qubit], mode=mmap[gate.mode])
    if isinstance(gate, PhononSelf):
        return dataclasses.replace(gate, mode=mmap[gate.mode])
    if isinstance(gate, PhononFrame):
        return dataclasses.replace(gate, modes=tuple(mmap[m] for m in gate.modes))
    raise TypeError(f"unknown gate {gate!r}")


@dataclass(frozen=True)
class FusedOp:
    """Either a dense local unitary on ``axes`` or a product of per-axis diagonals."""

    axes: tuple[int, ...]
    matrix: np.ndarray | None = None
    diagonal: dict | None = None


def _local_matrix(gates: Sequence[Gate], layout: RegisterLayout) -> tuple[tuple[int, ...], np.ndarray]:
    qubits = sorted({q for g in gates for q in gate_qubits(g)})
    modes = sorted({m for g in gates for m in gate_modes(g)})
    sub = RegisterLayout(len(qubits), tuple(layout.mode_windows[m] for m in modes))
    qmap = {q: i for i, q in enumerate(qubits)}
    mmap = {m: i for i, m in enumerate(modes)}
    remapped = [_remap(g, qmap, mmap) for g in gates]
    U = apply_gates_batch(np.eye(sub.dim, dtype=np.complex128), remapped, sub).T
    # exact zeros keep the sparse kernel cheap; round-off entries are dropped
    U[np.abs(U) < ZERO_TOL] = 0.0
    axes = tuple(layout.qubit_axis(q) for q in qubits) + tuple(layout.mode_axis(m) for m in modes)
    return axes, np.ascontiguousarray(U)


def fuse_gates(gates: Sequence[Gate], layout: RegisterLayout, max_dim: int = 32) -> list[FusedOp]:
    """Greedily merge consecutive gates into local unitaries of dimension <= ``max_dim``.

    Runs made only of diagonal gates become a single diagonal factor set.
    """
    dims = layout.dims
    groups: list[list[Gate]] = []
    axes: set[int] = set()
    for g in gates:
        ga = set(gate_axes(g, layout))
        if groups:
            cur = groups[-1]
            both_diag = all(is_diagonal(x) for x in cur) and is_diagonal(g)
            merged = axes | ga
            if both_diag or int(np.prod([dims[a] for a in merged])) <= max_dim:
                cur.append(g)
                axes = merged
                continue
        groups.append([g])
        axes = ga
    ops = []
    for grp in groups:
        if all(is_diagonal(g) for g in grp):
            diag: dict[int, np.ndarray] = {}
            for g in grp:
                for a, v in diagonal_factors(g, layout).items():
                    diag[a] = diag[a] * v if a in diag else np.array(v, dtype=np.complex128)
            if ops and ops[-1].diagonal is not None:
                prev = dict(ops[-1].diagonal)
                for a, v in diag.items():
                    prev[a] = prev[a] * v if a in prev else v
                ops[-1] = FusedOp(tuple(sorted(prev)), diagonal=prev)
            else:
                ops.append(FusedOp(tuple(sorted(diag)), diagonal=diag))
        else:
            ax, U = _local_matrix(grp, layout)
            ops.append(FusedOp(ax, matrix=U))
    return ops


def apply_fused(state: StateVector, ops: Sequence[FusedOp], backend: str = "auto") -> StateVector:
    for op in ops:
        if op.diagonal is not None:
            apply_diagonal(state, op.diagonal)
        else:
            apply_local(state, op.matrix, op.axes, backend=backend)
    return state


# Trotter evolution ----------------------------------------------------------

def run_trotter(circuit: Circuit, psi0: StateVector, observer: Observer | None = None, *,
                stride: int = 1, n_steps: int | None = None, fuse: str | bool = "auto",
                max_fused_dim: int = 32, keep_states: bool = False,
                progress: Callable[[int, int], None] | None = None,
                norm_tol: float = 1e-8) -> Trajectory:
    """Apply the circuit step ``n_steps`` times, sampling every ``stride`` steps.

    The final step is always sampled.  ``psi0`` is not modified.  A norm
    drift above ``norm_tol`` aborts with :class:`FloatingPointError`.
    """
    if circuit.layout != psi0.layout:
        raise ValueError("circuit layout does not match the initial state")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n_steps = circuit.n_steps if n_steps is None else n_steps
    dt = float(circuit.metadata.get("dt", 1.0))
    if fuse == "auto":
        fuse = psi0.layout.dim > FUSE_THRESHOLD
    ops = fuse_gates(circuit.step, circuit.layout, max_fused_dim) if fuse else None
    state = psi0.copy()
    n0 = state.norm()
    rows, times, kept = [], [], []

    def sample(k):
        times.append(k * dt)
        if observer is not None:
            rows.append(observer(state))
        else:
            rows.append({"echo": np.nan, "mean_boson": np.nan, "norm": state.norm(),
                         "gauss_violation": None})
        if keep_states:
            kept.append(state.copy())

    sample(0)
    for k in range(1, n_steps + 1):
        if ops is not None:
            apply_fused(state, ops)
        else:
            for g in circuit.step:
                apply_gate(state, g)
        if k % stride == 0 or k == n_steps:
            sample(k)
            drift = abs(rows[-1]["norm"] - n0)
            if drift > norm_tol:
                raise FloatingPointError(f"norm drift {drift:.2e} after {k} steps")
        if progress is not None:
            progress(k, n_steps)
    gv = None if rows[0]["gauss_violation"] is None else np.array([r["gauss_violation"] for r in rows])
    return Trajectory(np.array(times), np.array([r["echo"] for r in rows]),
                      np.array([r["mean_boson"] for r in rows]),
                      np.array([r["norm"] for r in rows]), gv, kept if keep_states else None,
                      {"method": "trotter", "fused": bool(fuse), "dt": dt, "steps": n_steps})


def sample_times(t_total: float, dt: float, stride: int = 1) -> np.ndarray:
    """Sample grid matching :func:`run_trotter` (every ``stride`` steps plus the end)."""
    n = int(round(t_total / dt))
    ks = list(range(0, n + 1, stride))
    if ks[-1] != n:
        ks.append(n)
    return np.array(ks, dtype=float) * dt
