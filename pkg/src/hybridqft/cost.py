"""Gate-count accounting for analog-digital circuits and fully-digital estimates.

Digital estimates are leading-order with unit constants; ``L = ceil(log2 cutoff)``
is the number of qubits of a binary boson register.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuits import Circuit
from .gates import FAMILIES

CATEGORIES = {
    "MS": "spin_spin",
    "SPINPHONON_MULTI": "spin_phonon",
    "SPINPHONON_LOCAL": "spin_phonon",
    "PHONON_SELF": "phonon_phonon",
    "SPINROT": "single_qubit",
    "ZROT": "single_qubit",
    "PHONON_FRAME": "frame",
}


@dataclass
class CostReport:
    model: str
    N: int
    cutoff: int
    scheme: str
    families: dict[str, int] = field(default_factory=dict)
    terms: dict[str, int] = field(default_factory=dict)
    leading: dict[str, str] = field(default_factory=dict)
    label: str = ""

    @property
    def categories(self) -> dict[str, int]:
        out = Counter()
        for fam, n in self.families.items():
            out[CATEGORIES.get(fam, fam)] += n
        return dict(out)

    @property
    def entangling(self) -> int:
        return sum(self.terms.values())

    def key(self):
        return (self.model, self.N, self.cutoff, self.scheme)


def count_circuit(circuit: Circuit) -> CostReport:
    """Per-step gate counts by family, read off the compiled step."""
    fams = Counter(FAMILIES[type(g)] for g in circuit.step)
    families = {name: int(fams.get(name, 0)) for name in FAMILIES.values()}
    meta = circuit.metadata
    terms = {"spin_spin": families["MS"],
             "spin_phonon": families["SPINPHONON_MULTI"] + families["SPINPHONON_LOCAL"],
             "phonon_phonon": families["PHONON_SELF"]}
    return CostReport(meta.get("model", ""), int(meta.get("N", 0)), int(meta.get("cutoff", 0)),
                      "analog_digital", families, terms, label="exact per-step counts")


def register_qubits(cutoff: int) -> int:
    """``ceil(log2 cutoff)``: the cutoff is rounded up to a power of two."""
    if cutoff < 2:
        raise ValueError(f"digital estimate needs cutoff >= 2, got {cutoff}")
    return math.ceil(math.log2(cutoff))


def qft_cnots(L: int) -> int:
    return L * L + L


def digital_estimate(model: str, N: int, cutoff: int, breakdown: bool = False) -> CostReport:
    """Fully-digital CNOT estimate per Trotter step.

    By default each Hamiltonian term is reported by its leading monomial
    with unit constant.  ``breakdown=True`` instead assembles the count from
    the building blocks: two Fourier transforms per shift operator, ``L``
    controlled corrections for the periodic wrap, and ``L (L - 1)`` for an
    occupation-squared phase.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    L = register_qubits(cutoff)
    shift = 2 * qft_cnots(L) + L
    if model == "yukawa":
        leading = {"hopping": "N", "mass": "1", "free_scalar": "1",
                   "interaction": "N^2 (log2 cutoff)^2"}
        if breakdown:
            # every (site, momentum) pair needs a controlled A and a controlled B shift
            terms = {"hopping": 2 * N, "mass": 0, "free_scalar": 0,
                     "interaction": 2 * N * N * shift}
        else:
            terms = {"hopping": N, "mass": 0, "free_scalar": 0, "interaction": N * N * L * L}
    elif model == "schwinger":
        leading = {"fermion_gauge": "N (log2 cutoff)^2", "mass": "1", "electric": "N (log2 cutoff)^2"}
        if breakdown:
            terms = {"fermion_gauge": 4 * N * shift, "mass": 0, "electric": N * L * (L - 1)}
        else:
            terms = {"fermion_gauge": N * L * L, "mass": 0, "electric": N * L * L}
    else:
        raise ValueError(f"unknown model {model!r}")
    label = "building-block breakdown" if breakdown else "leading-order, unit constants"
    return CostReport(model, N, cutoff, "digital", {}, terms, leading, label)


def analog_digital_counts(model: str, N: int) -> dict[str, int]:
    """Closed-form per-step counts of the compiled circuits (checked against traversal)."""
    if model == "yukawa":
        return {"spin_spin": 2 * N, "spin_phonon": N + 1, "phonon_phonon": 0}
    if model == "schwinger":
        return {"spin_spin": 8 * N, "spin_phonon": 4 * N, "phonon_phonon": N}
    raise ValueError(f"unknown model {model!r}")


def fit_exponent(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "N", "cutoff", "scheme", "entry", "count"])
    for r in reports:
        for name, n in sorted(r.families.items()):
            w.writerow([r.model, r.N, r.cutoff, r.scheme, f"family:{name}", n])
        for name, n in r.terms.items():
            w.writerow([r.model, r.N, r.cutoff, r.scheme, f"term:{name}", n])
    return buf.getvalue()


def reports_json(reports) -> str:
    out = {}
    for r in reports:
        d = asdict(r)
        d["categories"] = r.categories
        out["|".join(str(k) for k in r.key())] = d
    return json.dumps(out, indent=2, sort_keys=True)
