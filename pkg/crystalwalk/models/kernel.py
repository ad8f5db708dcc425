"""
Transition tables and one-step increment atoms
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from crystalwalk.models.lattice import GeometryParams, LatticeKind, MoveLabel, VertexClass

Row = Tuple[float, float, float]


class TransitionTable(BaseModel):
    """
    Transition probabilities of a walk

    `horizontal` is indexed [i][j'] on ice and [i][j][k'] on graphite.
    Value ranges and row sums are checked by `kernels.validate`, so a table
    can be built first and rejected with a precise error afterwards.
    """

    model_config = ConfigDict(frozen=True)

    kind: LatticeKind
    p: float = Field(..., description="Total vertical-jump probability")
    alpha: float = Field(..., description="Upward share of vertical jumps")
    horizontal: Tuple = Field(..., description="Horizontal probability rows")
    geometry: GeometryParams = Field(default_factory=GeometryParams)

    @model_validator(mode="before")
    @classmethod
    def freeze_rows(cls, data):
        """Store nested rows as tuples so tables stay hashable"""
        if isinstance(data, dict) and "horizontal" in data:
            data = dict(data)
            data["horizontal"] = _to_tuples(data["horizontal"])
        return data

    @model_validator(mode="after")
    def check_shape(self) -> "TransitionTable":
        shape = np.shape(self.horizontal)
        expected = (2, 3) if self.kind is LatticeKind.ICE else (2, 2, 3)
        if shape != expected:
            raise ValueError(f"horizontal rows of a {self.kind.value} table must have shape {expected}, got {shape}")
        return self

    def row(self, vertex_class: VertexClass) -> Row:
        if self.kind is LatticeKind.ICE:
            return tuple(self.horizontal[vertex_class.i])
        return tuple(self.horizontal[vertex_class.i][vertex_class.j])

    def vertical_allowed(self, vertex_class: VertexClass) -> bool:
        return self.kind is LatticeKind.ICE or vertex_class.j == 0

    @classmethod
    def symmetric(
        cls,
        kind: LatticeKind,
        p: float = 0.2,
        alpha: float = 0.5,
        geometry: GeometryParams = GeometryParams(),
    ) -> "TransitionTable":
        """Uniform horizontal rows: the reference configuration"""
        stay = [(1.0 - p) / 3.0] * 3
        if kind is LatticeKind.ICE:
            rows = [stay, stay]
        else:
            free = [1.0 / 3.0] * 3
            rows = [[stay, free], [stay, free]]
        return cls(kind=kind, p=p, alpha=alpha, horizontal=rows, geometry=geometry)


def _to_tuples(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(_to_tuples(v) for v in value)
    return float(value)


@dataclass(frozen=True)
class IncrementAtom:
    """One support point of the increment law given the current class"""

    move: MoveLabel
    displacement: np.ndarray
    probability: float
    class_after: VertexClass

    def __repr__(self) -> str:
        d = ", ".join(f"{x:.6g}" for x in self.displacement)
        return f"<IncrementAtom {self.move.name} ({d}) p={self.probability:.6g}>"


@dataclass(frozen=True)
class SignMoments:
    """
    Conditional law of the next class signs given the current class

    Sign vectors are (epsilon,) on ice and (i, j, k) on graphite.
    """

    mean: np.ndarray  # E[s']
    second: np.ndarray  # E[s' s'^T]
    cross: np.ndarray  # E[xi' s'^T], shape (3, len(s))

    @property
    def covariance(self) -> np.ndarray:
        return self.second - np.outer(self.mean, self.mean)
