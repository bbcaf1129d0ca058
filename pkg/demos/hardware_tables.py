"""Trap parameters behind the compiled circuits.

Fits the axial frequency to the measured transverse spectrum of a 3-ion
chain, then derives Lamb-Dicke factors, Rabi frequencies and frame shifts
for the Yukawa gates, and the standing-wave settings for the Schwinger
phonon-phonon gate.

    python demos/hardware_tables.py
"""
from __future__ import annotations

import math

import numpy as np

from hybridqft import SchwingerParams, TrapConfig, YukawaParams
from hybridqft import hardware as hw

y = YukawaParams(b=1, N=2, cutoff=8, g=5 * math.sqrt(2), m_psi=1, m_phi=1, dt=0.25, t_total=5)
wx = hw.from_khz(4000.0)
wz = hw.fit_axial_frequency(wx, hw.from_khz(np.array([4000, 3938.3, 3850.2])), 3)
cfg = TrapConfig(3, wx, wz, eta_base=0.068)
sheet = hw.yukawa_sheet(y, cfg, tau=20e-6)

print(f"fitted axial frequency {hw.khz(wz):.2f} kHz")
print("mode  omega/2pi [kHz]  frame shift [kHz]")
for m, (om, sh) in enumerate(zip(sheet.mode_omegas, sheet.frame_shifts)):
    print(f"{m:4d}  {hw.khz(om):14.2f}  {hw.khz(sh):12.3f}")
print("\nmode ion    theta      eta    Omega/2pi [kHz]")
for r in sheet.gates:
    print(f"{r.mode:4d} {r.ion:3d}  {r.theta:7.4f}  {r.eta:7.4f}  {hw.khz(r.omega):10.2f}")
print("(the ancilla rows, ion 2, use the literal per-site angles of the reference tables)")

s = SchwingerParams(b=1, N=8, cutoff=2, g=0.35, m=1, M=10, dt=0.125, t_total=5)
ss = hw.schwinger_sheet(s, hw.from_khz(6000.0), eta=0.056, tau_sa=1e-6, eta_tilde=0.05,
                        tau_aa=50e-6, theta=s.dt / 16)
print(f"\nSchwinger spin-phonon Rabi frequency {abs(hw.khz(ss.gates[0].omega)):.2f} kHz")
for k, v in ss.extras.items():
    print(f"  {k:18s} {v:.4g}")
for c in ss.checks:
    print(" ", c)
