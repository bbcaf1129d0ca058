"""Trotter-versus-exact comparison shared by the circuit, evolve and acceptance tests."""
from __future__ import annotations

import dataclasses

import numpy as np

from hybridqft import models as M
from hybridqft.circuits import compile_circuit
from hybridqft.evolve import Observer, exact_evolve, run_trotter, sample_times


def system_part(state, p):
    """Drop the Yukawa ancilla (projected on up); Schwinger states pass through."""
    if isinstance(p, M.SchwingerParams):
        return state.amplitudes
    dims = state.layout.dims
    return state.amplitudes.reshape(dims).take(0, axis=p.N).ravel()


def compare(p, dt, **circuit_kw):
    """Max echo error and max state error between Trotter and exact evolution at step ``dt``."""
    p = dataclasses.replace(p, dt=dt)
    anc = isinstance(p, M.YukawaParams)
    H = M.yukawa_hamiltonian(p) if anc else M.schwinger_hamiltonian(p)
    psi0 = M.initial_state(p)
    times = sample_times(p.t_total, dt)
    ex = exact_evolve(H, psi0, times, Observer(p, psi0), keep_states=True)
    psi0t = M.initial_state(p, ancilla=True) if anc else psi0
    tr = run_trotter(compile_circuit(p, **circuit_kw), psi0t, Observer(p, psi0t), keep_states=True)
    echo_err = float(np.max(np.abs(tr.echo - ex.echo)))
    state_err = max(float(np.linalg.norm(system_part(a, p) - b.amplitudes))
                    for a, b in zip(tr.states, ex.states))
    return dict(echo=echo_err, state=state_err, trotter=tr, exact=ex)
