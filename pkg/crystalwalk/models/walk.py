"""
Walk records, martingale ledgers and batch statistics
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from crystalwalk.models.lattice import LatticeKind, LatticeState

U64_MAX = (1 << 64) - 1


class WalkMode(str, Enum):
    """What a simulation keeps in memory"""

    TRAJECTORY = "trajectory"  # every visited state
    SUMMARY = "summary"  # final state, counters and ledger only


class RngSpec(BaseModel):
    """Seed and stream index of one replicate"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, le=U64_MAX, description="64-bit seed")
    stream_id: int = Field(0, ge=0, le=U64_MAX, description="64-bit stream index")

    def stream(self, stream_id: int) -> "RngSpec":
        return RngSpec(seed=self.seed, stream_id=stream_id)


@dataclass
class MartingaleLedger:
    """
    Pathwise decomposition S_n = M_n + R_n and the predictable brackets

    `N` holds the sign martingales: (N,) on ice, (N^J, N^K) on graphite.
    `bracket_N` is their bracket matrix and `bracket_C` the cross bracket
    with M, one column per sign martingale.
    """

    kind: LatticeKind
    M: np.ndarray
    R: np.ndarray
    N: np.ndarray
    bracket_M: np.ndarray
    bracket_N: np.ndarray
    bracket_C: np.ndarray

    @property
    def brackets(self) -> dict:
        """Named brackets in the notation of each lattice"""
        if self.kind is LatticeKind.ICE:
            return {
                "M": self.bracket_M,
                "N": float(self.bracket_N[0, 0]),
                "C": self.bracket_C[:, 0],
            }
        return {
            "M": self.bracket_M,
            "N^J": float(self.bracket_N[0, 0]),
            "N^K": float(self.bracket_N[1, 1]),
            "D": float(self.bracket_N[0, 1]),
            "C": self.bracket_C[:, 0],
            "E": self.bracket_C[:, 1],
        }


@dataclass
class WalkRecord:
    """Outcome of one simulated path"""

    kind: LatticeKind
    steps: int
    state: LatticeState
    S: np.ndarray
    counters: np.ndarray  # (I,) on ice, (I, J, K) on graphite; time-0 term included
    seed: int
    stream_id: int
    ledger: Optional[MartingaleLedger] = None
    trajectory: Optional[np.ndarray] = None  # rows (cell_k, cell_l, sheet_n, class index)

    @property
    def previous_counters(self) -> np.ndarray:
        """Counters at time n-1 (zero at n = 0)"""
        if self.steps == 0:
            return np.zeros_like(self.counters)
        return self.counters - np.array(self.state.vertex_class.signs)


@dataclass(frozen=True)
class CheckpointSample:
    """Position and counters of a long path at one checkpoint"""

    n: int
    S: np.ndarray
    counters: np.ndarray


@dataclass
class BatchStatistics:
    """Moments of S_n over independent replicates"""

    kind: LatticeKind
    replicates: int
    n: int
    seed: int
    mean_S: np.ndarray
    cov_scaled: np.ndarray  # covariance of S_n divided by n
    skewness: np.ndarray
    kurtosis: np.ndarray
    counter_means: np.ndarray  # averages of I_n/n (J_n/n, K_n/n)
