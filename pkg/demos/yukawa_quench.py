"""Quench from the strong-coupling vacuum of the Yukawa lattice (N=2, cutoff 8).

The exact curve comes from the full Hamiltonian; the Trotter curve from the
compiled ion circuit (two system ions plus one ancilla).  Halving the step
shows how fast the circuit converges: the state itself converges linearly in
dt, while the echo converges quadratically.

    python demos/yukawa_quench.py
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from hybridqft import YukawaParams, compile_circuit, exact_evolve, initial_state, run_trotter, yukawa_hamiltonian
from hybridqft.evolve import Observer, sample_times

p = YukawaParams(b=1, N=2, cutoff=8, g=5 * math.sqrt(2), m_psi=1, m_phi=1, dt=0.25, t_total=5)

psi0 = initial_state(p)
exact = exact_evolve(yukawa_hamiltonian(p), psi0, sample_times(p.t_total, p.dt), Observer(p, psi0))
psi0_anc = initial_state(p, ancilla=True)
trot = run_trotter(compile_circuit(p), psi0_anc, Observer(p, psi0_anc))

print("    t    echo(exact)  echo(trotter)   <N_d>(exact)  <N_d>(trotter)")
for i in range(0, len(exact.times), 2):
    print(f"{exact.times[i]:5.2f}   {exact.echo[i]:10.5f}   {trot.echo[i]:10.5f}     "
          f"{exact.mean_boson[i]:10.5f}    {trot.mean_boson[i]:10.5f}")

print("\nconvergence of the circuit under step halving")
print("   dt     max |echo error|   max |state error|")
for dt in (0.25, 0.125, 0.0625):
    q = dataclasses.replace(p, dt=dt)
    times = sample_times(q.t_total, dt)
    ex = exact_evolve(yukawa_hamiltonian(q), psi0, times, Observer(q, psi0), keep_states=True)
    tr = run_trotter(compile_circuit(q), psi0_anc, Observer(q, psi0_anc), keep_states=True)
    # drop the ancilla, which stays in its initial up state
    state_err = max(np.linalg.norm(a.amplitudes.reshape(a.layout.dims).take(0, axis=q.N).ravel() - b.amplitudes)
                    for a, b in zip(tr.states, ex.states))
    print(f"{dt:6.4f}   {np.abs(tr.echo - ex.echo).max():12.3e}     {state_err:12.3e}")
