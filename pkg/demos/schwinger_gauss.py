"""Schwinger model with oscillator links (N=4, two excitations either side of M=10).

Exact evolution stays in the Gauss-law sector of the initial state, so the
summed violation sum_j <G_j^2> is zero to rounding.  The compiled circuit
breaks the constraint at second order in the step.

    python demos/schwinger_gauss.py
"""
from __future__ import annotations

import warnings

from hybridqft import SchwingerParams, compile_circuit, exact_evolve, initial_state, run_trotter, schwinger_hamiltonian
from hybridqft.evolve import Observer, sample_times

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # M=10 against N=4 triggers the M >> N advisory
    base = dict(b=1, N=4, cutoff=2, g=0.35, m=1, M=10, t_total=5)
    p = SchwingerParams(dt=0.125, **base)
    p_half = SchwingerParams(dt=0.0625, **base)

psi0 = initial_state(p)
exact = exact_evolve(schwinger_hamiltonian(p), psi0, sample_times(p.t_total, p.dt),
                     Observer(p, psi0, boson="relative"))
print(f"exact solver: {exact.info['method']} on {exact.info['evolved_dim']} reachable basis states")
coarse = run_trotter(compile_circuit(p), psi0, Observer(p, psi0, boson="relative"))
fine = run_trotter(compile_circuit(p_half), psi0, Observer(p_half, psi0, boson="relative"), stride=2)

print("    t    echo(exact)  echo(dt)   <N_d>-M (exact)   Gauss(dt)   Gauss(dt/2)   ratio")
for i in range(0, len(exact.times), 4):
    r = coarse.gauss_violation[i] / fine.gauss_violation[i] if i else float("nan")
    print(f"{exact.times[i]:5.2f}   {exact.echo[i]:9.5f}  {coarse.echo[i]:9.5f}   {exact.mean_boson[i]:12.5f}"
          f"     {coarse.gauss_violation[i]:9.3e}   {fine.gauss_violation[i]:9.3e}   {r:5.2f}")
print(f"max exact Gauss violation {exact.gauss_violation.max():.1e}")
