"""Lattice models: parameters, truncated Hamiltonians, initial states, Gauss law.

Sites are 0-based in code; the staggered sign of site ``j`` is
``(-1)**(j + 1)`` so that the first site is odd.  Additive constants and
zero-point energies are dropped throughout.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fock import FockWindow, lowering_matrix, number_matrix
from .statespace import DOWN, UP, RegisterLayout, StateVector, basis_state

BOUNDARIES = ("plain", "jordan_wigner")

# exact sparse Hamiltonians are refused above this dimension
MAX_EXACT_DIM = 2_000_000

_X = sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex))
_Y = sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex))
_Z = sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex))


def _check_time_grid(dt, t_total):
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_total < 0:
        raise ValueError(f"t_total must be >= 0, got {t_total}")
    steps = t_total / dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValueError(f"t_total={t_total} is not an integer multiple of dt={dt}")


@dataclass(frozen=True)
class YukawaParams:
    b: float
    N: int
    cutoff: int
    g: float
    m_psi: float
    m_phi: float
    dt: float
    t_total: float

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"N must be even and >= 2, got {self.N}")
        if self.cutoff < 1:
            raise ValueError(f"boson cutoff must be >= 1, got {self.cutoff}")
        if self.b <= 0:
            raise ValueError(f"lattice spacing must be positive, got {self.b}")
        _check_time_grid(self.dt, self.t_total)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_total / self.dt))


@dataclass(frozen=True)
class SchwingerParams:
    b: float
    N: int
    cutoff: int
    g: float
    m: float
    M: int
    dt: float
    t_total: float

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"N must be even and >= 2, got {self.N}")
        if self.cutoff < 1:
            raise ValueError(f"electric-field cutoff must be >= 1, got {self.cutoff}")
        if self.M - self.cutoff < 0:
            raise ValueError(f"M - cutoff must be >= 0, got M={self.M}, cutoff={self.cutoff}")
        if self.b <= 0:
            raise ValueError(f"lattice spacing must be positive, got {self.b}")
        _check_time_grid(self.dt, self.t_total)
        if self.M < self.N:
            warnings.warn(f"M={self.M} is not large compared with N={self.N}; "
                          "the bosonic link model is far from the rotor limit", stacklevel=2)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_total / self.dt))

    @property
    def window(self) -> FockWindow:
        return FockWindow.around(self.M, self.cutoff)


def stagger(j: int) -> int:
    """``(-1)**j`` for the physical (1-based) label of 0-based site ``j``."""
    return -1 if j % 2 == 0 else 1


# layouts and states ----------------------------------------------------------

def yukawa_layout(p: YukawaParams, ancilla: bool = False) -> RegisterLayout:
    return RegisterLayout(p.N + int(ancilla), (FockWindow.cutoff(p.cutoff),) * p.N)


def schwinger_layout(p: SchwingerParams) -> RegisterLayout:
    return RegisterLayout(p.N, (p.window,) * p.N)


def vacuum_bits(N: int) -> list[int]:
    """Staggered Dirac sea: odd (physical) sites filled, i.e. spin up."""
    return [UP if stagger(j) == -1 else DOWN for j in range(N)]


def initial_state(p, ancilla: bool = False) -> StateVector:
    """Strong-coupling vacuum: no fermion, no antifermion, bosons at rest."""
    if isinstance(p, YukawaParams):
        layout = yukawa_layout(p, ancilla)
        bits = vacuum_bits(p.N) + ([UP] if ancilla else [])
        return basis_state(layout, bits, [0] * p.N)
    if isinstance(p, SchwingerParams):
        return basis_state(schwinger_layout(p), vacuum_bits(p.N), [p.M] * p.N)
    raise TypeError(f"unsupported parameter set {type(p).__name__}")


# sparse embedding -------------------------------------------------------------

def embed(factors: dict[int, sp.spmatrix | np.ndarray], dims) -> sp.csr_matrix:
    """Kronecker product over all axes, identity on axes not in ``factors``."""
    dim = int(np.prod(dims, dtype=object))
    if dim > MAX_EXACT_DIM:
        raise MemoryError(f"operator dimension {dim} exceeds the exact-build cap {MAX_EXACT_DIM}")
    out = sp.identity(1, dtype=complex, format="csr")
    run = 1
    for axis, d in enumerate(dims):
        f = factors.get(axis)
        if f is None:
            run *= d
            continue
        if run > 1:
            out = sp.kron(out, sp.identity(run, dtype=complex), format="csr")
            run = 1
        out = sp.kron(out, sp.csr_matrix(f), format="csr")
    if run > 1:
        out = sp.kron(out, sp.identity(run, dtype=complex), format="csr")
    return out


def _jw_dressing(layout: RegisterLayout, N: int) -> dict[int, sp.spmatrix]:
    """Z string on the interior sites of the wrap-around bond."""
    return {layout.qubit_axis(l): _Z for l in range(1, N - 1)}


def _bond_sign(N: int, j: int, boundary: str) -> float:
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    if j == N - 1 and boundary == "jordan_wigner":
        return -1.0 if (N // 2) % 2 else 1.0
    return 1.0


@dataclass
class Hamiltonian:
    """Named sparse Hermitian pieces on a common layout."""

    layout: RegisterLayout
    pieces: dict[str, sp.csr_matrix] = field(default_factory=dict)

    def total(self) -> sp.csr_matrix:
        out = sp.csr_matrix((self.layout.dim, self.layout.dim), dtype=complex)
        for h in self.pieces.values():
            out = out + h
        return out.tocsr()


# Yukawa -------------------------------------------------------------------------

def scalar_mode_energies(p: YukawaParams) -> np.ndarray:
    """Scalar-mode energies for mode labels ``m = 1..N`` (momentum ``k = m - N/2 - 1``)."""
    k = np.arange(1, p.N + 1) - p.N / 2 - 1
    return np.sqrt((2 * np.pi * k / (p.N * p.b)) ** 2 + p.m_phi ** 2)


def mode_phases(N: int) -> np.ndarray:
    """``phi[m, j] = 2 pi j (m - N/2 - 1) / N`` for physical labels ``m, j = 1..N``."""
    m = np.arange(1, N + 1)[:, None]
    j = np.arange(1, N + 1)[None, :]
    return 2 * np.pi * j / N * (m - N / 2 - 1)


def yukawa_coupling(p: YukawaParams) -> float:
    """Prefactor ``sqrt(g^2 b / (8 N))`` of the spin-boson interaction."""
    return math.sqrt(p.g ** 2 * p.b / (8 * p.N))


def yukawa_hamiltonian(p: YukawaParams, ancilla: bool = False,
                       boundary: str = "plain") -> Hamiltonian:
    """Spin-phonon Yukawa Hamiltonian split into hopping XX, hopping YY, mass, interaction.

    ``boundary="plain"`` keeps the wrap-around bond as a bare two-body term,
    as compiled into circuits; ``"jordan_wigner"`` attaches the fermionic
    sign string.  With ``ancilla`` an idle extra qubit is appended.
    """
    layout = yukawa_layout(p, ancilla)
    dims, N = layout.dims, p.N
    eps = scalar_mode_energies(p)
    phases = mode_phases(N)
    pieces = {}
    for name, pauli in (("hop_xx", _X), ("hop_yy", _Y)):
        h = sp.csr_matrix((layout.dim, layout.dim), dtype=complex)
        for j in range(N):
            k = (j + 1) % N
            factors = {layout.qubit_axis(j): pauli, layout.qubit_axis(k): pauli}
            if j == N - 1 and boundary == "jordan_wigner":
                factors.update(_jw_dressing(layout, N))
            h = h + _bond_sign(N, j, boundary) / (4 * p.b) * embed(factors, dims)
        pieces[name] = h
    pieces["mass"] = sum(
        (p.m_psi / 2 * stagger(j) * embed({layout.qubit_axis(j): _Z}, dims) for j in range(N)),
        sp.csr_matrix((layout.dim, layout.dim), dtype=complex))
    w = FockWindow.cutoff(p.cutoff)
    a = sp.csr_matrix(lowering_matrix(w))
    n = sp.csr_matrix(number_matrix(w).astype(complex))
    lam = yukawa_coupling(p)
    h = sp.csr_matrix((layout.dim, layout.dim), dtype=complex)
    for m in range(N):
        ma = layout.mode_axis(m)
        h = h + eps[m] * embed({ma: n}, dims)
        for j in range(N):
            quad = (np.exp(1j * phases[m, j]) * a + np.exp(-1j * phases[m, j]) * a.conj().T)
            occ = sp.identity(2, dtype=complex) + _Z
            h = h + lam / math.sqrt(eps[m]) * embed({layout.qubit_axis(j): occ, ma: quad}, dims)
    pieces["interaction"] = h.tocsr()
    return Hamiltonian(layout, pieces)


def fermion_number(p, ancilla: bool = False) -> sp.csr_matrix:
    """``sum_j psi_j^dag psi_j = sum_j (1 + Z_j) / 2``."""
    layout = yukawa_layout(p, ancilla) if isinstance(p, YukawaParams) else schwinger_layout(p)
    occ = (sp.identity(2, dtype=complex) + _Z) / 2
    return sum((embed({layout.qubit_axis(j): occ}, layout.dims) for j in range(p.N)),
               sp.csr_matrix((layout.dim, layout.dim), dtype=complex)).tocsr()


# Schwinger -------------------------------------------------------------------

def schwinger_hamiltonian(p: SchwingerParams, boundary: str = "plain") -> Hamiltonian:
    """Bosonic-link Schwinger Hamiltonian: hopping (four strings), mass, electric."""
    layout = schwinger_layout(p)
    dims, N = layout.dims, p.N
    w = p.window
    a = sp.csr_matrix(lowering_matrix(w))
    ad = a.conj().T.tocsr()
    n = sp.csr_matrix(number_matrix(w).astype(complex))
    c = 1.0 / (8 * p.b * math.sqrt(p.M))
    strings = (
        (_X, a + ad, _X),
        (_Y, a + ad, _Y),
        (_X, 1j * (a - ad), _Y),
        (_Y, -1j * (a - ad), _X),
    )
    hop = sp.csr_matrix((layout.dim, layout.dim), dtype=complex)
    for j in range(N):
        k = (j + 1) % N
        for left, boson, right in strings:
            factors = {layout.qubit_axis(j): left, layout.qubit_axis(k): right,
                       layout.mode_axis(j): boson}
            if j == N - 1 and boundary == "jordan_wigner":
                factors.update(_jw_dressing(layout, N))
            hop = hop + _bond_sign(N, j, boundary) * c * embed(factors, dims)
    mass = sum((p.m / 2 * stagger(j) * embed({layout.qubit_axis(j): _Z}, dims) for j in range(N)),
               sp.csr_matrix((layout.dim, layout.dim), dtype=complex))
    e2 = p.g ** 2 * p.b / 2
    local = e2 * (-2 * p.M * n + n @ n)
    electric = sum((embed({layout.mode_axis(j): local}, dims) for j in range(N)),
                   sp.csr_matrix((layout.dim, layout.dim), dtype=complex))
    return Hamiltonian(layout, {"hopping": hop.tocsr(), "mass": mass.tocsr(),
                                "electric": electric.tocsr()})


def schwinger_hopping_terms(p: SchwingerParams, site: int) -> list[sp.csr_matrix]:
    """The four hopping strings on bond ``(site, site+1)``, each with its coefficient."""
    layout = schwinger_layout(p)
    w = p.window
    a = sp.csr_matrix(lowering_matrix(w))
    ad = a.conj().T.tocsr()
    c = 1.0 / (8 * p.b * math.sqrt(p.M))
    k = (site + 1) % p.N
    out = []
    for left, boson, right in ((_X, a + ad, _X), (_Y, a + ad, _Y),
                               (_X, 1j * (a - ad), _Y), (_Y, -1j * (a - ad), _X)):
        out.append(c * embed({layout.qubit_axis(site): left, layout.qubit_axis(k): right,
                              layout.mode_axis(site): boson}, layout.dims))
    return out


def gauss_local(p: SchwingerParams, site: int) -> np.ndarray:
    """Eigenvalues of ``G_site`` on the grid (spin of site, link site-1, link site).

    ``G_j = E_j - E_{j-1} - psi_j^dag psi_j + (1 - (-1)^j) / 2`` with
    ``E = n - M`` and periodic links (``E_0 = E_N``).
    """
    e = p.window.occupations - p.M
    occ = np.array([1.0, 0.0])  # spin up is a filled site
    background = (1 - stagger(site)) / 2
    return (e[None, None, :] - e[None, :, None] - occ[:, None, None] + background)


def gauss_operator(p: SchwingerParams, site: int) -> sp.dia_matrix:
    """Diagonal sparse ``G_site`` on the full Schwinger register."""
    layout = schwinger_layout(p)
    if not 0 <= site < p.N:
        raise IndexError(f"site {site} out of range for N={p.N}")
    local = gauss_local(p, site)
    prev = (site - 1) % p.N
    axes = [layout.qubit_axis(site), layout.mode_axis(prev), layout.mode_axis(site)]
    shape = [1] * len(layout.dims)
    if prev == site:
        raise ValueError("Gauss operator needs N >= 2")
    vals = np.zeros(layout.dims)
    # place the local table on (spin, link j-1, link j) and broadcast
    order = np.argsort(axes)
    table = np.transpose(local, order)
    for ax, d in zip(sorted(axes), table.shape):
        shape[ax] = d
    vals = vals + table.reshape(shape)
    return sp.diags(vals.reshape(-1))
