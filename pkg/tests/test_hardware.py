from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridqft import hardware as hw
from hybridqft.circuits import phonon_self_angles

import oracles
from conftest import schwinger, yukawa_row1, yukawa_row2

TRAP3 = [4000, 3938.3, 3850.2]
TRAP6 = [4000, 3938.3, 3849.4, 3735.5, 3596.4, 3430.7]


def trap(freqs, eta=0.068):
    wx = hw.from_khz(4000.0)
    wz = hw.fit_axial_frequency(wx, hw.from_khz(np.array(freqs)), len(freqs))
    return hw.TrapConfig(len(freqs), wx, wz, eta)


def test_three_ion_spectrum():
    cfg = trap(TRAP3)
    assert abs(hw.khz(cfg.omega_z) - 699.9) <= 1
    modes = hw.normal_modes(cfg)
    np.testing.assert_allclose(hw.khz(modes.omegas), TRAP3, atol=0.2)
    ref_w, ref_v, ref_mu = oracles.transverse_modes(3, cfg.omega_x, cfg.omega_z)
    np.testing.assert_allclose(np.sort(modes.omegas), np.sort(ref_w), rtol=1e-10)
    assert abs(modes.mu[2] / modes.mu[1] - 2.4) < 1e-9


def test_six_ion_spectrum():
    cfg = trap(TRAP6)
    np.testing.assert_allclose(hw.khz(hw.normal_modes(cfg).omegas), TRAP6, atol=0.2)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_modes_match_oracle_and_are_orthonormal(n):
    wx, wz = hw.from_khz(4000.0), hw.from_khz(300.0)
    modes = hw.normal_modes(hw.TrapConfig(n, wx, wz, 0.05))
    V = modes.vectors
    assert np.abs(V @ V.T - np.eye(n)).max() < 1e-10
    ref_w, ref_v, _ = oracles.transverse_modes(n, wx, wz)
    np.testing.assert_allclose(np.sort(modes.omegas), np.sort(ref_w), rtol=1e-9)
    # eigenvectors agree up to sign for nondegenerate spectra
    order = np.argsort(-ref_w)
    for m in range(n):
        assert abs(abs(np.dot(V[m], ref_v[order[m]])) - 1) < 1e-7


def test_equilibrium_positions_match_energy_minimum():
    for n in (2, 3, 4, 6):
        np.testing.assert_allclose(hw.equilibrium_positions(n), oracles.ion_positions(n), atol=1e-6)
    assert abs(hw.equilibrium_positions(2)[1] - 0.25 ** (1 / 3)) < 1e-12


def test_three_ion_gate_parameters():
    sh = hw.yukawa_sheet(yukawa_row1(), trap(TRAP3), 20e-6)
    rows = {(r.mode, r.ion): r for r in sh.gates}
    for j in range(3):
        assert abs(abs(rows[(0, j)].eta) - 0.039) <= 0.001
        assert abs(abs(hw.khz(rows[(0, j)].omega)) - 98.6) / 98.6 < 0.015
    for j, (e, om) in enumerate([(0.028, 248.4), (0.057, 124.2), (0.028, 248.4)]):
        assert abs(abs(rows[(2, j)].eta) - e) <= 0.001
        assert abs(abs(hw.khz(rows[(2, j)].omega)) - om) / om < 0.015
    np.testing.assert_allclose(hw.khz(sh.frame_shifts), [2.2, 0, 0.7], atol=0.05)


def test_six_ion_gate_parameters():
    sh = hw.yukawa_sheet(yukawa_row2(), trap(TRAP6), 10e-6)
    rows = {(r.mode, r.ion): r for r in sh.gates}
    printed_eta = [[0.028] * 5, [0.042, 0.023, 0.008, 0.008, 0.023],
                   [0.038, 0.009, 0.029, 0.029, 0.009], [0.025, 0.038, 0.0196, 0.0196, 0.038]]
    printed_om = [[69.7] * 5, [61.8, 109.5, 336.3, 336.3, 109.5],
                  [91.7, 380.6, 120.8, 120.8, 380.6], [102.3, 67.4, 131.8, 131.8, 67.4]]
    for m in range(4):
        for j in range(5):
            r = rows[(m, j)]
            assert abs(abs(r.eta) - printed_eta[m][j]) <= 0.001
            assert abs(abs(hw.khz(r.omega)) - printed_om[m][j]) / printed_om[m][j] < 0.015
    np.testing.assert_allclose(hw.khz(sh.frame_shifts), [1.3, 0.7, 0.4, 0.7, 0, 0], atol=0.05)


def test_lamb_dicke_scaling():
    cfg = trap(TRAP3)
    modes = hw.normal_modes(cfg)
    eta = hw.lamb_dicke(cfg, modes)
    ref = cfg.eta_base * np.sqrt(cfg.omega_x / modes.omegas)[:, None] * modes.vectors
    assert np.abs(eta - ref).max() < 1e-15


def test_schwinger_sheet():
    p = schwinger(N=8)
    sh = hw.schwinger_sheet(p, hw.from_khz(6000.0), 0.056, 1e-6, 0.05, 50e-6, theta=p.dt / 16)
    assert abs(abs(hw.khz(sh.gates[0].omega)) - 43.9) / 43.9 < 0.015
    ex = sh.extras
    assert abs(ex["F_khz"] - 1949.6) / 1949.6 < 0.01
    assert abs(ex["delta_omega_x_khz"] - 9.2) <= 0.1
    assert round(ex["adiabatic_ratio"], 3) == 0.001
    assert round(ex["eta_sqrtM"], 2) == 0.18 and round(ex["eta_tilde_sqrtM"], 2) == 0.16
    assert all(c.ok for c in sh.checks)
    text = sh.to_csv()
    assert text.startswith("section,gate,mode,ion,theta,eta,omega_khz,tau_us,value")


def test_standing_wave_reproduces_chi():
    p = schwinger(N=8)
    chi1, chi2 = phonon_self_angles(p)
    sw = hw.standing_wave_params(chi1, chi2, 0.05, hw.from_khz(6000.0), 50e-6)
    et, tau = 0.05, 50e-6
    assert abs(2 * sw.F * et ** 4 * tau - chi2) < 1e-15
    assert abs(sw.chi1_native + sw.delta_omega_x * tau - chi1) < 1e-12
    with pytest.raises(ValueError):
        hw.standing_wave_params(chi1, chi2, 0.3, 1.0, 1.0)


@settings(max_examples=50)
@given(st.floats(-1, 1), st.floats(0.001, 0.2), st.floats(1e-6, 1e-4))
def test_angle_rabi_roundtrip(theta, eta, tau):
    om = hw.spin_phonon_params(theta, eta, tau)
    assert abs(hw.rotation_angle(om, eta, tau) - theta) < 1e-12


def test_errors():
    with pytest.raises(ValueError, match="stationary"):
        hw.spin_phonon_params(np.array([0.1, 0.2]), np.array([0.03, 0.0]), 1e-5)
    assert hw.spin_phonon_params(0.0, 0.0, 1e-5) == 0.0
    with pytest.raises(ValueError):
        hw.TrapConfig(3, 1.0, 2.0, 0.05)
    with pytest.raises(ValueError):
        hw.TrapConfig(3, 2.0, 1.0, 0.5)
    with pytest.raises(ValueError, match="unstable"):
        hw.normal_modes(hw.TrapConfig(12, 1.0, 0.9, 0.05))
    with pytest.raises(ValueError, match="ions"):
        hw.yukawa_sheet(yukawa_row2(), trap(TRAP3), 1e-5)
    v = hw.normal_modes(hw.TrapConfig(3, 4.0, 1.0, 0.05)).vectors
    with pytest.raises(ValueError, match="even"):
        hw.select_modes(v, 3, [0, 1, 2])


def test_unit_helpers():
    assert hw.khz(hw.from_khz(123.4)) == pytest.approx(123.4)
    np.testing.assert_allclose(hw.khz(hw.from_khz(np.array([1.0, 2.0]))), [1.0, 2.0])
