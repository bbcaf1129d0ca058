from __future__ import annotations

import math
import time
import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from hybridqft import models as M
from hybridqft.statespace import basis_state

import oracles
from conftest import schwinger, yukawa_row1, yukawa_row2


def coeff(H, P):
    """Hilbert-Schmidt coefficient of Pauli string ``P`` in ``H``."""
    return (H.multiply(sp.csr_matrix(P).T).sum() / H.shape[0])


def test_mode_energies_reference_values():
    t0 = time.perf_counter()
    e2 = M.scalar_mode_energies(yukawa_row1())
    e4 = M.scalar_mode_energies(yukawa_row2())
    assert time.perf_counter() - t0 < 1e-3
    np.testing.assert_allclose(e2, [3.297, 1], atol=5e-4)
    np.testing.assert_allclose(e4, [3.297, 1.862, 1, 1.862], atol=5e-4)


@given(st.sampled_from([2, 4, 6, 8, 10]), st.floats(0.1, 3), st.floats(0.1, 3))
def test_zero_momentum_energy_is_mass(N, b, m_phi):
    e = M.scalar_mode_energies(yukawa_row2(N=N, b=b, m_phi=m_phi))
    assert abs(e[N // 2] - m_phi) < 1e-14


def test_yukawa_coefficients():
    p = yukawa_row2()
    H = M.yukawa_hamiltonian(p)
    dims = H.layout.dims
    assert abs(coeff(H.pieces["hop_xx"], oracles.place({0: oracles.X, 1: oracles.X}, dims)) - 0.25) < 1e-14
    assert abs(coeff(H.pieces["hop_yy"], oracles.place({2: oracles.Y, 3: oracles.Y}, dims)) - 0.25) < 1e-14
    assert abs(M.yukawa_coupling(p) / math.sqrt(1.0) - math.sqrt(25 / 32)) < 1e-14
    assert abs(math.sqrt(25 / 32) - 0.8839) < 1e-4
    # site 0 filled, others empty: only site 0 couples, (1 + Z) = 2, k = 0 mode has phase 0
    lay = H.layout
    src = basis_state(lay, [0, 1, 1, 1], [0, 0, 0, 0]).amplitudes
    dst = basis_state(lay, [0, 1, 1, 1], [0, 0, 1, 0]).amplitudes
    amp = dst @ (H.pieces["interaction"] @ src)
    assert abs(amp - 2 * math.sqrt(25 / 32)) < 1e-12


def test_schwinger_coefficients():
    p = schwinger(N=2, cutoff=2)
    H = M.schwinger_hamiltonian(p)
    lay = H.layout
    el = H.pieces["electric"].diagonal()
    g2b = 0.35 ** 2 / 2
    assert abs(g2b * -2 * 10 - (-1.225)) < 1e-12 and abs(g2b - 0.06125) < 1e-15
    for n0, n1 in ((8, 10), (12, 9)):
        idx = lay.index([0, 0], [n0, n1])
        assert abs(el[idx] - sum(-1.225 * n + 0.06125 * n * n for n in (n0, n1))) < 1e-12
    src = lay.index([1, 0], [10, 10])
    dst = lay.index([0, 1], [11, 10])
    # sigma^+_0 d^dag_0 sigma^-_1 with amplitude sqrt(11) / (2 sqrt(M))
    assert abs(H.total()[dst, src] - math.sqrt(11) / (2 * math.sqrt(10))) < 1e-14
    assert abs(1 / (8 * math.sqrt(10)) - 0.03953) < 1e-5
    terms = M.schwinger_hopping_terms(p, 0)
    for t, ref in zip(terms, oracles.schwinger_hopping(2, 1, 2, 10, 1)):
        assert abs(t.toarray() - ref).max() < 1e-14


@pytest.mark.parametrize("N", [2, 4])
def test_yukawa_matches_fermionic_transcription(N):
    p = yukawa_row2(N=N)
    H = M.yukawa_hamiltonian(p, boundary="jordan_wigner").total().toarray()
    ref = oracles.yukawa_fermionic(N, 1, 1, 5, 1, 1)
    assert np.abs(H - ref).max() < 1e-12


@pytest.mark.parametrize("N,cutoff", [(2, 1), (2, 3), (4, 1)])
def test_yukawa_matches_literal_spin_form(N, cutoff):
    p = yukawa_row2(N=N, cutoff=cutoff)
    H = M.yukawa_hamiltonian(p).total().toarray()
    assert np.abs(H - oracles.yukawa_spin_literal(N, 1, cutoff, 5, 1, 1)).max() < 1e-12


@pytest.mark.parametrize("N,cutoff", [(2, 1), (2, 2), (4, 1)])
def test_schwinger_matches_spin_boson_form(N, cutoff):
    p = schwinger(N=N, cutoff=cutoff)
    H = M.schwinger_hamiltonian(p).total().toarray()
    assert np.abs(H - oracles.schwinger_spin_boson(N, 1, cutoff, 0.35, 1, 10)).max() < 1e-12


def test_pieces_hermitian():
    for H in (M.yukawa_hamiltonian(yukawa_row1()), M.yukawa_hamiltonian(yukawa_row2(), True),
              M.yukawa_hamiltonian(yukawa_row2(), boundary="jordan_wigner"),
              M.schwinger_hamiltonian(schwinger()),
              M.schwinger_hamiltonian(schwinger(), boundary="jordan_wigner")):
        for name, h in H.pieces.items():
            assert abs(h - h.conj().T).max() < 1e-13, name


@pytest.mark.parametrize("N,cutoff,boundary", [(2, 1, "plain"), (4, 2, "plain"), (4, 2, "jordan_wigner")])
def test_schwinger_commutes_with_gauss(N, cutoff, boundary):
    p = schwinger(N=N, cutoff=cutoff)
    H = M.schwinger_hamiltonian(p, boundary).total()
    for j in range(N):
        G = M.gauss_operator(p, j)
        comm = H @ G - G @ H
        assert (abs(comm).max() if comm.nnz else 0.0) < 1e-12


def test_gauss_examples():
    p = schwinger()
    psi = M.initial_state(p).amplitudes
    for j in range(p.N):
        assert np.abs(M.gauss_operator(p, j) @ psi).max() == 0
    # one extra boson on link 1: G_1 = +1, G_2 = -1, others 0
    lay = M.schwinger_layout(p)
    bits = M.vacuum_bits(p.N)
    s = basis_state(lay, bits, [10, 11, 10, 10]).amplitudes
    vals = [float(((M.gauss_operator(p, j) @ s) @ s).real) for j in range(p.N)]
    assert vals == [0.0, 1.0, -1.0, 0.0]
    small = schwinger(N=2, cutoff=1)
    for j in range(2):
        np.testing.assert_array_equal(M.gauss_operator(small, j).toarray(),
                                      oracles.gauss_dense(2, 10, 1, j + 1).real)


@pytest.mark.parametrize("boundary", ["plain", "jordan_wigner"])
def test_yukawa_conserves_fermion_number(boundary):
    p = yukawa_row2(N=2)
    H = M.yukawa_hamiltonian(p, boundary=boundary).total()
    F = M.fermion_number(p)
    assert abs(H @ F - F @ H).max() < 1e-13


def test_initial_states():
    p = yukawa_row1()
    s = M.initial_state(p, ancilla=True)
    (idx,) = np.flatnonzero(s.amplitudes)
    bits, occ = s.layout.unravel(idx)
    assert bits == (0, 1, 0) and occ == (0, 0)
    sw = schwinger()
    (idx,) = np.flatnonzero(M.initial_state(sw).amplitudes)
    assert M.schwinger_layout(sw).unravel(idx) == ((0, 1, 0, 1), (10,) * 4)
    # staggered vacuum minimizes the mass term
    mass = M.yukawa_hamiltonian(yukawa_row2()).pieces["mass"].diagonal().real
    psi = M.initial_state(yukawa_row2()).amplitudes
    assert abs(mass[np.flatnonzero(psi)[0]] - mass.min()) < 1e-14


def test_param_validation():
    with pytest.raises(ValueError, match="even"):
        yukawa_row2(N=3)
    with pytest.raises(ValueError, match="cutoff"):
        yukawa_row2(cutoff=0)
    with pytest.raises(ValueError, match="multiple"):
        yukawa_row2(t_total=1.3)
    with pytest.raises(ValueError, match="M - cutoff"):
        M.SchwingerParams(b=1, N=2, cutoff=3, g=1, m=1, M=2, dt=0.1, t_total=1)
    with pytest.warns(UserWarning, match="not large"):
        M.SchwingerParams(b=1, N=4, cutoff=1, g=1, m=1, M=2, dt=0.1, t_total=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        M.SchwingerParams(b=1, N=4, cutoff=1, g=1, m=1, M=10, dt=0.1, t_total=1)


def test_exact_build_cap():
    p = schwinger(N=8)
    with pytest.raises(MemoryError):
        M.schwinger_hamiltonian(p)
