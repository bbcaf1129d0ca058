from __future__ import annotations

import math
import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hybridqft.models import SchwingerParams, YukawaParams  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


def yukawa_row1(**kw):
    base = dict(b=1, N=2, cutoff=8, g=5 * math.sqrt(2), m_psi=1, m_phi=1, dt=0.25, t_total=5)
    base.update(kw)
    return YukawaParams(**base)


def yukawa_row2(**kw):
    base = dict(b=1, N=4, cutoff=1, g=5, m_psi=1, m_phi=1, dt=0.125, t_total=2.5)
    base.update(kw)
    return YukawaParams(**base)


def schwinger(**kw):
    base = dict(b=1, N=4, cutoff=2, g=0.35, m=1, M=10, dt=0.125, t_total=5)
    base.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SchwingerParams(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
