"""Entangling-gate counts per Trotter step, analog-digital against fully digital.

Analog-digital counts are read off the compiled circuits.  Digital counts are
leading-order estimates with unit constants for a binary boson register of
ceil(log2 cutoff) qubits.

    python demos/cost_scaling.py
"""
from __future__ import annotations

import warnings

from hybridqft import SchwingerParams, YukawaParams, compile_circuit, count_circuit, digital_estimate

warnings.simplefilter("ignore")
print("model       N  cutoff   analog MS  spin-phonon  phonon-phonon   digital CNOT")
for N in (2, 4, 8, 16, 64):
    for cutoff in (4, 16, 256):
        y = YukawaParams(b=1, N=N, cutoff=1, g=1, m_psi=1, m_phi=1, dt=0.1, t_total=0.1)
        s = SchwingerParams(b=1, N=N, cutoff=1, g=1, m=1, M=10, dt=0.1, t_total=0.1)
        for name, p in (("yukawa", y), ("schwinger", s)):
            ad = count_circuit(compile_circuit(p)).terms
            dg = digital_estimate(name, N, cutoff).entangling
            print(f"{name:10s} {N:2d}  {cutoff:6d}   {ad['spin_spin']:9d}  {ad['spin_phonon']:11d}"
                  f"  {ad['phonon_phonon']:13d}   {dg:12d}")
print("\nanalog counts do not depend on the cutoff; the digital ones grow as (log2 cutoff)^2")
