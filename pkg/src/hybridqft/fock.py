"""Truncated bosonic-mode algebra on a finite occupation window."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FockWindow:
    """Occupations ``n_min .. n_max`` (inclusive) kept for one bosonic mode.

    Plain cutoff modes use ``FockWindow(0, cutoff)``; a highly occupied mode
    centred on ``M`` uses :meth:`around`.
    """

    n_min: int
    n_max: int

    def __post_init__(self):
        if int(self.n_min) != self.n_min or int(self.n_max) != self.n_max:
            raise ValueError(f"occupations must be integers, got {self.n_min}, {self.n_max}")
        if self.n_min < 0:
            raise ValueError(f"n_min must be >= 0, got {self.n_min}")
        if self.n_max < self.n_min:
            raise ValueError(f"n_max ({self.n_max}) < n_min ({self.n_min})")

    @classmethod
    def cutoff(cls, cutoff: int) -> "FockWindow":
        return cls(0, cutoff)

    @classmethod
    def around(cls, center: int, half_width: int) -> "FockWindow":
        """Symmetric window ``[center - half_width, center + half_width]``."""
        return cls(center - half_width, center + half_width)

    @property
    def dim(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def occupations(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def index(self, n: int) -> int:
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"occupation {n} outside window [{self.n_min}, {self.n_max}]")
        return n - self.n_min


def lowering_matrix(w: FockWindow) -> np.ndarray:
    """Annihilation operator restricted to the window.

    ``<n-1|a|n> = sqrt(n)`` for ``n_min < n <= n_max``; the lowest state has
    no partner inside the window and is annihilated.
    """
    n = w.occupations[1:].astype(float)
    return np.diag(np.sqrt(n), k=1).astype(complex)


def raising_matrix(w: FockWindow) -> np.ndarray:
    return lowering_matrix(w).conj().T


def number_matrix(w: FockWindow) -> np.ndarray:
    return np.diag(w.occupations.astype(float))


def phase_diagonal(w: FockWindow, c1: float, c2: float) -> np.ndarray:
    """Diagonal of ``exp(-i (c1 n + c2 n^2))`` over the window."""
    n = w.occupations.astype(float)
    return np.exp(-1j * (c1 * n + c2 * n * n))
