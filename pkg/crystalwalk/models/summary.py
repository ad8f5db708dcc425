"""
Closed-form limit objects of a walk
"""

from dataclasses import dataclass, field, fields
from typing import Dict, Optional

import numpy as np

from crystalwalk.models.lattice import GeometryParams, LatticeKind


@dataclass(frozen=True)
class DerivedRates:
    """
    Horizontal rate combinations of a table

    Ice arrays have shape (2,) indexed by i; graphite arrays have shape
    (2, 2) indexed [i, j].
    """

    kind: LatticeKind
    u: np.ndarray
    v: np.ndarray
    s: Optional[np.ndarray] = None  # u (1 - u), graphite only
    t: Optional[np.ndarray] = None  # v (u - 1), graphite only


@dataclass(frozen=True)
class AsymptoticSummary:
    """Drift vectors, fluctuation matrices and limiting brackets of a walk"""

    kind: LatticeKind
    p: float
    alpha: float
    geometry: GeometryParams
    mu: np.ndarray
    theta: np.ndarray
    sigma2: np.ndarray
    nu: np.ndarray
    zeta: np.ndarray
    lln_limit: np.ndarray
    Gamma: np.ndarray
    Lambda: np.ndarray
    counter_limits: np.ndarray
    m: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    delta: Optional[np.ndarray] = None
    cancellation_flag: bool = field(default=False)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.Gamma).min())

    def coefficients(self) -> Dict[str, np.ndarray]:
        """Every array-valued field that is defined for this lattice"""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                out[f.name] = value
        return out

    def __repr__(self) -> str:
        return f"<AsymptoticSummary {self.kind.value} p={self.p} alpha={self.alpha}>"
