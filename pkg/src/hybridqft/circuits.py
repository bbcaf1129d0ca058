"""Compile model parameters into Trotter-step gate sequences and angle tables.

Gate lists are in time order: the first gate acts first.  A written operator
product ``A B C`` therefore appears as ``[C, B, A]``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gates import (MS, Gate, PhononFrame, PhononSelf, S, Sdg, SpinPhononLocal,
                    SpinPhononMulti, SpinRot, ZRot, format_gate, gate_axes, parse_gate)
from .models import (SchwingerParams, YukawaParams, mode_phases, scalar_mode_energies,
                     schwinger_layout, stagger, yukawa_coupling, yukawa_layout)
from .statespace import RegisterLayout

FRAME_POLICIES = ("interleaved", "lumped")
ANCILLA_MODES = ("exact", "literal")


@dataclass(frozen=True)
class Circuit:
    """One Trotter step repeated ``n_steps`` times."""

    layout: RegisterLayout
    step: tuple[Gate, ...]
    n_steps: int = 1
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "step", tuple(self.step))
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")
        for g in self.step:
            gate_axes(g, self.layout)  # raises on invalid targets

    @property
    def steps(self) -> list[list[Gate]]:
        return [list(self.step) for _ in range(self.n_steps)]

    def with_steps(self, n_steps: int) -> "Circuit":
        return Circuit(self.layout, self.step, n_steps, dict(self.metadata))

    def __len__(self):
        return len(self.step) * self.n_steps


# angle tables ------------------------------------------------------------------

@dataclass(frozen=True)
class AngleRow:
    kind: str
    site: int | None
    mode: int | None
    theta: float
    phi: float | None = None


def yukawa_angles(p: YukawaParams, ancilla: str = "exact") -> list[AngleRow]:
    """Rotation angles of one Yukawa Trotter step.

    Kinds: ``hop`` (MS angle on bond ``site, site+1``), ``mass`` (Z rotation),
    ``spin_phonon`` (one entry per site and mode; the ancilla is site ``N``).
    Sites and modes are 0-based.
    """
    if ancilla not in ANCILLA_MODES:
        raise ValueError(f"ancilla must be one of {ANCILLA_MODES}, got {ancilla!r}")
    N, dt = p.N, p.dt
    rows = [AngleRow("hop", j, None, dt / (4 * p.b)) for j in range(N)]
    rows += [AngleRow("mass", j, None, 0.5 * p.m_psi * stagger(j) * dt) for j in range(N)]
    eps = scalar_mode_energies(p)
    theta = yukawa_coupling(p) / np.sqrt(eps) * dt
    phases = mode_phases(N)
    for j in range(N):
        rows += [AngleRow("spin_phonon", j, m, float(theta[m]), float(phases[m, j]))
                 for m in range(N)]
    if ancilla == "exact":
        # the site-independent part sums coherently into the zero-momentum mode only
        m0 = N // 2
        rows.append(AngleRow("spin_phonon", N, m0, float(N * theta[m0]), 0.0))
    else:
        ph = 2 * np.pi * (N + 1) / N * (np.arange(1, N + 1) - N / 2 - 1)
        rows += [AngleRow("spin_phonon", N, m, float(theta[m]), float(ph[m])) for m in range(N)]
    return rows


def schwinger_angles(p: SchwingerParams) -> list[AngleRow]:
    """Angles of one Schwinger Trotter step (kinds ``spin_phonon``, ``mass``, ``chi1``, ``chi2``)."""
    th = p.dt / (8 * p.b * math.sqrt(p.M))
    rows = [AngleRow("spin_phonon", j, j, th, None) for j in range(p.N)]
    rows += [AngleRow("mass", j, None, 0.5 * stagger(j) * p.m * p.dt) for j in range(p.N)]
    chi1, chi2 = phonon_self_angles(p)
    rows += [AngleRow("chi1", None, j, chi1) for j in range(p.N)]
    rows += [AngleRow("chi2", None, j, chi2) for j in range(p.N)]
    return rows


def phonon_self_angles(p: SchwingerParams) -> tuple[float, float]:
    return -p.g ** 2 * p.b * p.M * p.dt, 0.5 * p.g ** 2 * p.b * p.dt


def angles_csv(rows: Sequence[AngleRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "site", "mode", "theta", "phi"])
    for r in rows:
        w.writerow([r.kind, "" if r.site is None else r.site, "" if r.mode is None else r.mode,
                    repr(float(r.theta)), "" if r.phi is None else repr(float(r.phi))])
    return buf.getvalue()


@dataclass(frozen=True)
class AngleConflict:
    name: str
    printed: float
    formula: float
    note: str

    @property
    def ratio(self) -> float:
        return self.printed / self.formula


def angle_conflicts() -> list[AngleConflict]:
    """Known disagreements between the tabulated reference angles and the angle formulas.

    The formulas are used for compilation because only they make each gate
    block equal the exponential of its Hamiltonian term.
    """
    y2 = YukawaParams(b=1, N=2, cutoff=8, g=5 * math.sqrt(2), m_psi=1, m_phi=1,
                      dt=0.25, t_total=5)
    th = {(r.site, r.mode): r.theta for r in yukawa_angles(y2) if r.kind == "spin_phonon"}
    sw = SchwingerParams(b=1, N=8, cutoff=2, g=0.35, m=1, M=10, dt=0.125, t_total=5)
    th_s = schwinger_angles(sw)[0].theta
    return [
        AngleConflict("yukawa N=2 theta_(m=1,j)", 0.344, th[(0, 0)],
                      f"printed value is sqrt(N)={math.sqrt(2):.4f} times the formula"),
        AngleConflict("yukawa N=2 theta_(m=2,j)", 0.625, th[(0, 1)],
                      f"printed value is sqrt(N)={math.sqrt(2):.4f} times the formula"),
        AngleConflict("schwinger theta_j", 0.008, th_s,
                      f"printed value matches dt/(16b)={sw.dt / 16:.6f}, not dt/(8b sqrt(M))"),
    ]


# step compilation ----------------------------------------------------------

def _bonds(N):
    return [(j, (j + 1) % N) for j in range(N)]


def _conditional_z_block(qubit, modes, thetas, phis) -> list[Gate]:
    """``exp(-i sum theta (e^{i phi} a + h.c.) Z)`` as X-rotation conjugated spin-phonon."""
    return [SpinRot(qubit, -math.pi / 4, 0.0),
            SpinPhononMulti(qubit, tuple(modes), tuple(thetas), tuple(phis)),
            SpinRot(qubit, math.pi / 4, 0.0)]


def yukawa_step(p: YukawaParams, frame: str = "interleaved", ancilla: str = "exact") -> list[Gate]:
    """Gates of one Yukawa Trotter step on ``N`` system qubits plus ancilla qubit ``N``.

    Order: XX hopping, YY hopping, mass, then the spin-phonon blocks for
    sites ``0..N-1`` and the ancilla.  ``frame`` places the free scalar
    evolution either after every spin-phonon block in ``N + 1`` equal slices
    (``interleaved``) or once at the end (``lumped``).
    """
    if frame not in FRAME_POLICIES:
        raise ValueError(f"frame policy must be one of {FRAME_POLICIES}, got {frame!r}")
    N = p.N
    rows = yukawa_angles(p, ancilla)
    hop = {r.site: r.theta for r in rows if r.kind == "hop"}
    mass = {r.site: r.theta for r in rows if r.kind == "mass"}
    sp_rows: dict[int, list[AngleRow]] = {}
    for r in rows:
        if r.kind == "spin_phonon":
            sp_rows.setdefault(r.site, []).append(r)

    gates: list[Gate] = [MS(j, k, hop[j]) for j, k in _bonds(N)]
    gates += [Sdg(j) for j in range(N)]
    gates += [MS(j, k, hop[j]) for j, k in _bonds(N)]
    gates += [S(j) for j in range(N)]
    gates += [ZRot(j, mass[j]) for j in range(N)]

    eps = tuple(float(e) for e in scalar_mode_energies(p))
    modes = tuple(range(N))
    for site in range(N + 1):
        block = sp_rows[site]
        gates += _conditional_z_block(site, [r.mode for r in block], [r.theta for r in block],
                                      [r.phi for r in block])
        if frame == "interleaved":
            gates.append(PhononFrame(modes, eps, p.dt / (N + 1)))
    if frame == "lumped":
        gates.append(PhononFrame(modes, eps, p.dt))
    return gates


def _schwinger_bracket(j, k, mode, theta, phi, s_left, s_right) -> list[Gate]:
    """Conjugated local spin-phonon gate on bond ``(j, k)``, in time order."""
    pre = [Sdg(j)] * s_left + [Sdg(k)] * s_right
    post = [S(j)] * s_left + [S(k)] * s_right
    return (pre + [MS(j, k, -math.pi / 4), SpinRot(j, -math.pi / 4, 0.0),
                   SpinPhononLocal(j, mode, theta, phi),
                   SpinRot(j, math.pi / 4, 0.0), MS(j, k, math.pi / 4)] + post)


# (S power on site j, S power on site j+1, sign of theta, phi) for the four hopping strings
SCHWINGER_BRACKETS = ((1, 0, 1.0, 0.0), (2, 1, 1.0, 0.0),
                      (1, 1, 1.0, math.pi / 2), (2, 0, -1.0, math.pi / 2))


def schwinger_step(p: SchwingerParams) -> list[Gate]:
    """Gates of one Schwinger Trotter step: four hopping brackets, mass, electric."""
    th = p.dt / (8 * p.b * math.sqrt(p.M))
    gates: list[Gate] = []
    for s_left, s_right, sign, phi in SCHWINGER_BRACKETS:
        for j, k in _bonds(p.N):
            gates += _schwinger_bracket(j, k, j, sign * th, phi, s_left, s_right)
    gates += [ZRot(j, 0.5 * stagger(j) * p.m * p.dt) for j in range(p.N)]
    chi1, chi2 = phonon_self_angles(p)
    gates += [PhononSelf(j, chi1, chi2) for j in range(p.N)]
    return gates


def compile_circuit(p, *, frame: str = "interleaved", ancilla: str = "exact",
                    n_steps: int | None = None) -> Circuit:
    """Full Trotter circuit for a parameter set."""
    if isinstance(p, YukawaParams):
        layout = yukawa_layout(p, ancilla=True)
        step = yukawa_step(p, frame=frame, ancilla=ancilla)
        meta = {"model": "yukawa", "dt": p.dt, "frame": frame, "ancilla": ancilla}
    elif isinstance(p, SchwingerParams):
        layout = schwinger_layout(p)
        step = schwinger_step(p)
        meta = {"model": "schwinger", "dt": p.dt}
    else:
        raise TypeError(f"unsupported parameter set {type(p).__name__}")
    steps = p.n_steps if n_steps is None else n_steps
    meta.update(N=p.N, cutoff=p.cutoff, angles="in-text formulas")
    return Circuit(layout, step, steps, meta)


def dump_circuit(circuit: Circuit) -> str:
    """Text form of one step, one gate per line, preceded by a comment header."""
    lines = [f"# model={circuit.metadata.get('model', '?')} dt={circuit.metadata.get('dt', '?')} "
             f"steps={circuit.n_steps} qubits={circuit.layout.n_qubits} "
             f"modes={circuit.layout.n_modes}"]
    lines += [format_gate(g) for g in circuit.step]
    return "\n".join(lines) + "\n"


def load_circuit_step(text: str) -> list[Gate]:
    return [parse_gate(line) for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]
