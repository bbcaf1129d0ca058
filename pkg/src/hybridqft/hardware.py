"""Trapped-ion parameters for compiled circuits.

Frequencies are angular (rad/s) internally; ``*_khz`` helpers convert to
``omega / 2 pi`` in kHz for reporting.  Model times are converted to lab time
through the gate durations only, so model units never mix with SI units.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import phonon_self_angles, yukawa_angles
from .models import SchwingerParams, YukawaParams, scalar_mode_energies

TWO_PI = 2 * math.pi


def khz(omega: float | np.ndarray) -> float | np.ndarray:
    return np.asarray(omega) / TWO_PI / 1e3 if np.ndim(omega) else omega / TWO_PI / 1e3


def from_khz(f: float | np.ndarray) -> float | np.ndarray:
    return np.asarray(f) * TWO_PI * 1e3 if np.ndim(f) else f * TWO_PI * 1e3


@dataclass(frozen=True)
class TrapConfig:
    n_ions: int
    omega_x: float
    omega_z: float
    eta_base: float
    mode_axis: str = "x"

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError(f"n_ions must be >= 1, got {self.n_ions}")
        if not self.omega_x > self.omega_z > 0:
            raise ValueError(f"need omega_x > omega_z > 0, got {self.omega_x}, {self.omega_z}")
        if not 0 < self.eta_base < 0.2:
            raise ValueError(f"eta_base must lie in (0, 0.2), got {self.eta_base}")


def equilibrium_positions(n: int, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Dimensionless axial positions of ``n`` ions in a harmonic well.

    Solves ``u_i = sum_{j != i} sign(u_i - u_j) / (u_i - u_j)^2`` by Newton
    iteration; lengths are in units of ``(e^2 / (4 pi eps0 m omega_z^2))^(1/3)``.
    """
    if n == 1:
        return np.zeros(1)
    u = np.linspace(-1, 1, n) * (n ** 0.56)
    for _ in range(max_iter):
        d = u[:, None] - u[None, :]
        np.fill_diagonal(d, np.inf)
        f = u - np.sum(np.sign(d) / d ** 2, axis=1)
        if np.max(np.abs(f)) < tol:
            return u
        jac = -2 / np.abs(d) ** 3
        jac[np.diag_indices(n)] = 1 - jac.sum(axis=1)
        u = u - np.linalg.solve(jac, f)
    raise RuntimeError(f"equilibrium positions did not converge to {tol:g} "
                       f"(residual {np.max(np.abs(f)):.2e})")


def coulomb_matrix(n: int) -> np.ndarray:
    """Transverse coupling ``B`` with ``omega_m^2 = omega_x^2 - mu_m omega_z^2``."""
    u = equilibrium_positions(n)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    B = -1 / d ** 3
    np.fill_diagonal(B, -B.sum(axis=1))
    return B


@dataclass(frozen=True)
class NormalModes:
    omegas: np.ndarray   # descending, COM first
    vectors: np.ndarray  # vectors[m, j]: mode m, ion j
    mu: np.ndarray


def normal_modes(cfg: TrapConfig) -> NormalModes:
    """Transverse normal modes of a linear chain."""
    mu, vec = np.linalg.eigh(coulomb_matrix(cfg.n_ions))
    mu = np.where(np.abs(mu) < 1e-12, 0.0, mu)
    w2 = cfg.omega_x ** 2 - mu * cfg.omega_z ** 2
    if np.any(w2 <= 0):
        raise ValueError("transverse chain is unstable (zigzag transition) for this trap")
    vectors = vec.T.copy()
    for m in range(vectors.shape[0]):
        nz = np.flatnonzero(np.abs(vectors[m]) > 1e-9)
        if vectors[m, nz[0]] < 0:
            vectors[m] *= -1
    return NormalModes(np.sqrt(w2), vectors, mu)


def fit_axial_frequency(omega_x: float, omegas: Sequence[float], n_ions: int) -> float:
    """Least-squares ``omega_z`` from measured transverse frequencies (descending)."""
    mu = np.sort(np.linalg.eigvalsh(coulomb_matrix(n_ions)))
    dw = omega_x ** 2 - np.sort(np.asarray(omegas, dtype=float))[::-1] ** 2
    return math.sqrt(float(np.dot(mu, dw) / np.dot(mu, mu)))


def lamb_dicke(cfg: TrapConfig, modes: NormalModes | None = None) -> np.ndarray:
    """``eta[m, j] = eta_base * sqrt(omega_x / omega_m) * b[m, j]``."""
    modes = normal_modes(cfg) if modes is None else modes
    return cfg.eta_base * np.sqrt(cfg.omega_x / modes.omegas)[:, None] * modes.vectors


def select_modes(vectors: np.ndarray, n_required: int, ions: Sequence[int],
                 tol: float = 1e-6) -> list[int]:
    """First ``n_required`` modes with no stationary ion among ``ions``."""
    ok = [m for m in range(vectors.shape[0]) if np.all(np.abs(vectors[m, list(ions)]) > tol)]
    if len(ok) < n_required:
        raise ValueError(f"only {len(ok)} modes move every operated ion {list(ions)}; "
                         f"{n_required} needed (use an even ion count)")
    return ok[:n_required]


def spin_phonon_params(theta, eta, tau: float):
    """Rabi frequency ``Omega = 2 theta / (eta tau)`` realizing rotation ``theta``."""
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if tau <= 0:
        raise ValueError(f"gate time must be positive, got {tau}")
    bad = (eta == 0) & (theta != 0)
    if np.any(bad):
        where = np.argwhere(bad)
        raise ValueError(f"zero Lamb-Dicke coupling for required gate(s) at index {where.tolist()}: "
                         "the ion is stationary in that mode")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(theta == 0, 0.0, 2 * theta / (eta * tau))
    return float(out) if out.ndim == 0 else out


def rotation_angle(omega, eta, tau: float):
    """Inverse of :func:`spin_phonon_params`."""
    out = np.asarray(omega, dtype=float) * np.asarray(eta, dtype=float) * tau / 2
    return float(out) if out.ndim == 0 else out


def frame_shifts_yukawa(p: YukawaParams, tau: float, mode_map: Sequence[int] | None = None,
                        n_trap_modes: int | None = None) -> np.ndarray:
    """Per-trap-mode interaction-picture shift ``eps_m dt / (tau (N + 1))`` in rad/s.

    ``mode_map[m]`` is the trap mode carrying model mode ``m``; trap modes
    that carry nothing get 0.
    """
    if tau <= 0:
        raise ValueError(f"gate time must be positive, got {tau}")
    eps = scalar_mode_energies(p)
    mode_map = list(range(p.N)) if mode_map is None else list(mode_map)
    n_trap = max(mode_map) + 1 if n_trap_modes is None else n_trap_modes
    out = np.zeros(n_trap)
    for m, tm in enumerate(mode_map):
        out[tm] = eps[m] * p.dt / (tau * (p.N + 1))
    return out


@dataclass(frozen=True)
class StandingWave:
    F: float
    chi1_native: float
    delta_omega_x: float
    adiabatic_ratio: float
    feasible: bool


def standing_wave_params(chi1: float, chi2: float, eta_tilde: float, omega_x: float,
                         tau_aa: float, max_ratio: float = 0.01) -> StandingWave:
    """Standing-wave amplitude and sideband shift for a phonon self-interaction.

    ``chi2 = 2 F eta~^4 tau`` fixes ``F``; the native linear coefficient
    ``2 F (eta~^4 - eta~^2) tau`` is corrected to ``chi1`` by a frequency
    shift accounted over ``tau_aa``.
    """
    if not 0 < eta_tilde < 0.2:
        raise ValueError(f"standing-wave Lamb-Dicke parameter outside (0, 0.2): {eta_tilde}")
    if tau_aa <= 0:
        raise ValueError(f"gate time must be positive, got {tau_aa}")
    F = chi2 / (2 * eta_tilde ** 4 * tau_aa)
    native = 2 * F * (eta_tilde ** 4 - eta_tilde ** 2) * tau_aa
    ratio = F * eta_tilde ** 2 / omega_x
    return StandingWave(F, native, (chi1 - native) / tau_aa, ratio, ratio < max_ratio)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    ok: bool

    def __str__(self):
        return f"{'pass' if self.ok else 'warn'} {self.name} = {self.value:.4g} (limit {self.limit:g})"


def feasibility_report(*, eta: float | None = None, eta_tilde: float | None = None, M: int = 0,
                       F: float | None = None, omega_x: float | None = None,
                       hopping_rate: float | None = None, tau_min: float | None = None,
                       occupation_limit: float = 0.3, adiabatic_limit: float = 0.01,
                       hopping_limit: float = 0.1) -> list[Check]:
    """Report-only checks of the approximations behind the gates."""
    out = []
    if eta is not None:
        out.append(Check("lamb_dicke eta", abs(eta), 0.2, abs(eta) < 0.2))
        if M > 0:
            v = abs(eta) * math.sqrt(M)
            out.append(Check("eta*sqrt(M)", v, occupation_limit, v < occupation_limit))
    if eta_tilde is not None:
        v = eta_tilde * math.sqrt(M)
        out.append(Check("eta_tilde*sqrt(M)", v, occupation_limit, v < occupation_limit))
    if F is not None and eta_tilde is not None and omega_x is not None:
        v = F * eta_tilde ** 2 / omega_x
        out.append(Check("F*eta_tilde^2/omega_x", v, adiabatic_limit, v < adiabatic_limit))
    if hopping_rate is not None and tau_min is not None:
        v = hopping_rate * tau_min
        out.append(Check("phonon hopping * gate time", v, hopping_limit, v < hopping_limit))
    return out


# sheets ------------------------------------------------------------------------

@dataclass
class GateRow:
    gate: str
    mode: int
    ion: int
    theta: float
    eta: float
    omega: float
    tau: float


@dataclass
class HardwareSheet:
    model: str
    mode_omegas: np.ndarray
    vectors: np.ndarray | None
    eta: np.ndarray | None
    gates: list[GateRow]
    frame_shifts: np.ndarray | None = None
    extras: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "gate", "mode", "ion", "theta", "eta", "omega_khz", "tau_us", "value"])
        for m, om in enumerate(self.mode_omegas):
            shift = "" if self.frame_shifts is None else repr(float(khz(self.frame_shifts[m])))
            w.writerow(["mode", "", m, "", "", "", repr(float(khz(om))), "", shift])
        for r in self.gates:
            w.writerow(["gate", r.gate, r.mode, r.ion, repr(r.theta), repr(r.eta),
                        repr(float(khz(r.omega))), repr(r.tau * 1e6), ""])
        for k, v in self.extras.items():
            w.writerow(["extra", k, "", "", "", "", "", "", repr(float(v))])
        for c in self.checks:
            w.writerow(["check", c.name, "", "", "", "", "", "", f"{c.value!r};{'pass' if c.ok else 'warn'}"])
        return buf.getvalue()


def yukawa_sheet(p: YukawaParams, cfg: TrapConfig, tau: float, ancilla: str = "literal",
                 hopping_rate: float | None = None) -> HardwareSheet:
    """Hardware parameters for the Yukawa circuit on ``cfg.n_ions`` ions.

    Ions ``0..N`` are operated (the last of them is the ancilla); any further
    ion is idle.  ``ancilla="literal"`` reproduces the tabulated per-mode ancilla angles,
    ``"exact"`` the angles actually compiled by default.
    """
    if cfg.n_ions < p.N + 1:
        raise ValueError(f"need at least N+1={p.N + 1} ions, got {cfg.n_ions}")
    modes = normal_modes(cfg)
    eta = lamb_dicke(cfg, modes)
    ions = list(range(p.N + 1))
    chosen = select_modes(modes.vectors, p.N, ions)
    rows = []
    for r in yukawa_angles(p, ancilla):
        if r.kind != "spin_phonon":
            continue
        tm = chosen[r.mode]
        e = float(eta[tm, r.site])
        rows.append(GateRow("spin_phonon", tm, r.site, r.theta, e,
                            spin_phonon_params(r.theta, e, tau), tau))
    shifts = frame_shifts_yukawa(p, tau, chosen, cfg.n_ions)
    checks = feasibility_report(eta=float(np.max(np.abs(eta[chosen][:, ions]))), M=0,
                                hopping_rate=hopping_rate, tau_min=tau)
    return HardwareSheet("yukawa", modes.omegas, modes.vectors, eta, rows, shifts,
                         {"omega_z_khz": khz(cfg.omega_z)}, checks)


def schwinger_sheet(p: SchwingerParams, omega_x: float, eta: float, tau_sa: float,
                    eta_tilde: float, tau_aa: float, theta: float | None = None,
                    hopping_rate: float | None = None) -> HardwareSheet:
    """Hardware parameters for the Schwinger circuit on local transverse modes.

    ``theta`` overrides the spin-phonon angle (the tabulated hardware settings realize
    ``dt / (16 b)``); by default the compiled angle is used.
    """
    th = p.dt / (8 * p.b * math.sqrt(p.M)) if theta is None else theta
    om = spin_phonon_params(th, eta, tau_sa)
    rows = [GateRow("spin_phonon_local", j, j, th, eta, om, tau_sa) for j in range(p.N)]
    chi1, chi2 = phonon_self_angles(p)
    sw = standing_wave_params(chi1, chi2, eta_tilde, omega_x, tau_aa)
    checks = feasibility_report(eta=eta, eta_tilde=eta_tilde, M=p.M, F=sw.F, omega_x=omega_x,
                                hopping_rate=hopping_rate, tau_min=min(tau_sa, tau_aa))
    extras = {"F_khz": khz(sw.F), "delta_omega_x_khz": khz(sw.delta_omega_x),
              "chi1_native": sw.chi1_native, "adiabatic_ratio": sw.adiabatic_ratio,
              "eta_sqrtM": eta * math.sqrt(p.M), "eta_tilde_sqrtM": eta_tilde * math.sqrt(p.M),
              "tau_aa_us": tau_aa * 1e6}
    return HardwareSheet("schwinger", np.full(p.N, omega_x), None, None, rows, None, extras, checks)
