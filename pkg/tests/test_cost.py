from __future__ import annotations

import json
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridqft import cost
from hybridqft.circuits import Circuit, compile_circuit
from hybridqft.statespace import RegisterLayout

from conftest import schwinger, yukawa_row2

NS = np.unique(np.round(np.logspace(np.log10(2), np.log10(2000), 12) / 2).astype(int) * 2)
LS = np.unique(np.round(np.logspace(0, 3, 12)).astype(int))


@pytest.mark.parametrize("N", [2, 4, 8])
def test_counts_from_traversal(N):
    t0 = time.perf_counter()
    y = cost.count_circuit(compile_circuit(yukawa_row2(N=N)))
    s = cost.count_circuit(compile_circuit(schwinger(N=N)))
    assert time.perf_counter() - t0 < 1.0
    assert y.terms == {"spin_spin": 2 * N, "spin_phonon": N + 1, "phonon_phonon": 0}
    assert s.terms == {"spin_spin": 8 * N, "spin_phonon": 4 * N, "phonon_phonon": N}
    assert y.terms == cost.analog_digital_counts("yukawa", N)
    assert s.terms == cost.analog_digital_counts("schwinger", N)
    assert y.families["PHONON_FRAME"] == N + 1
    assert s.categories["single_qubit"] == s.families["SPINROT"] + s.families["ZROT"]


def fit(model, term, vary, breakdown=False, fixed_N=8, fixed_L=4):
    if vary == "N":
        xs = NS
        ys = [cost.digital_estimate(model, int(n), 2 ** fixed_L, breakdown).terms[term] for n in xs]
    else:
        xs = LS
        ys = [cost.digital_estimate(model, fixed_N, 2 ** int(L), breakdown).terms[term] for L in xs]
    return cost.fit_exponent(xs, ys)


@pytest.mark.parametrize("model,term,n_exp,l_exp", [
    ("yukawa", "hopping", 1, 0), ("yukawa", "interaction", 2, 2),
    ("schwinger", "fermion_gauge", 1, 2), ("schwinger", "electric", 1, 2)])
def test_leading_exponents(model, term, n_exp, l_exp):
    assert abs(fit(model, term, "N") - n_exp) < 0.1
    assert abs(fit(model, term, "L") - l_exp) < 0.1


@pytest.mark.parametrize("model,term", [("yukawa", "interaction"), ("schwinger", "fermion_gauge"),
                                        ("schwinger", "electric")])
def test_breakdown_exponents(model, term):
    """Building-block counts carry subleading L terms; their slope tends to 2 for large L."""
    assert abs(fit(model, term, "N", True) - (2 if term == "interaction" else 1)) < 0.1
    Ls = np.arange(100, 1001, 100)
    ys = [cost.digital_estimate(model, 8, 2 ** int(L), True).terms[term] for L in Ls]
    assert abs(cost.fit_exponent(Ls, ys) - 2) < 0.05


@pytest.mark.parametrize("model", ["yukawa", "schwinger"])
def test_digital_over_analog_ratio_grows_as_log_squared(model):
    N = 8
    ms = cost.analog_digital_counts(model, N)["spin_spin"]
    Ls = np.arange(2, 11)
    ratio = [cost.digital_estimate(model, N, 2 ** int(L)).entangling / ms for L in Ls]
    assert abs(cost.fit_exponent(Ls, ratio) - 2) < 0.1


def test_doubling_log_cutoff_quadruples_interaction():
    a = cost.digital_estimate("yukawa", 4, 4).terms["interaction"]
    b = cost.digital_estimate("yukawa", 4, 16).terms["interaction"]
    assert b == 4 * a


def test_breakdown_small_cutoff():
    assert cost.digital_estimate("schwinger", 4, 2, breakdown=True).terms["electric"] == 0
    assert cost.register_qubits(2) == 1 and cost.register_qubits(5) == 3
    with pytest.raises(ValueError):
        cost.digital_estimate("schwinger", 4, 1)
    with pytest.raises(ValueError):
        cost.digital_estimate("ising", 4, 4)


@given(st.sampled_from(["yukawa", "schwinger"]), st.integers(1, 500), st.integers(2, 2 ** 20),
       st.booleans())
def test_monotone_and_nonnegative(model, half_n, cutoff, breakdown):
    N = 2 * half_n
    a = cost.digital_estimate(model, N, cutoff, breakdown).terms
    b = cost.digital_estimate(model, N + 2, cutoff, breakdown).terms
    c = cost.digital_estimate(model, N, 2 * cutoff, breakdown).terms
    for k in a:
        assert isinstance(a[k], int) and a[k] >= 0
        assert b[k] >= a[k] and c[k] >= a[k]


def test_empty_circuit():
    r = cost.count_circuit(Circuit(RegisterLayout(2), []))
    assert r.entangling == 0 and all(v == 0 for v in r.families.values())


def test_report_serialization():
    reps = [cost.count_circuit(compile_circuit(schwinger())),
            cost.digital_estimate("schwinger", 4, 2)]
    text = cost.reports_csv(reps)
    assert text.splitlines()[0] == "model,N,cutoff,scheme,entry,count"
    assert "schwinger,4,2,analog_digital,term:spin_spin,32" in text
    d = json.loads(cost.reports_json(reps))
    assert d["schwinger|4|2|analog_digital"]["terms"]["phonon_phonon"] == 4
    assert cost.reports_json(reps) == cost.reports_json(reps)


def test_counts_for_registers_too_large_to_simulate():
    r = cost.count_circuit(compile_circuit(schwinger(N=64)))
    assert r.terms == cost.analog_digital_counts("schwinger", 64)
