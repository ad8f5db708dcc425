"""
Lattice domain types
"""

from enum import Enum, IntEnum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LatticeKind(str, Enum):
    """The two stacked-honeycomb structures"""

    ICE = "ice"  # 1h structure
    GRAPHITE = "graphite"  # 2h structure


class MoveLabel(IntEnum):
    """One-step moves, in the fixed atom order used for sampling"""

    UP = 0
    DOWN = 1
    H0 = 2
    H1 = 3
    H2 = 4

    @property
    def is_vertical(self) -> bool:
        return self in (MoveLabel.UP, MoveLabel.DOWN)

    @property
    def direction(self) -> Optional[int]:
        """Horizontal direction index j' in {0, 1, 2}, None for vertical moves"""
        if self.is_vertical:
            return None
        return int(self) - int(MoveLabel.H0)

    @classmethod
    def horizontal(cls, direction: int) -> "MoveLabel":
        return cls(int(cls.H0) + direction)


class GeometryParams(BaseModel):
    """Bond length inside a sheet and spacing between sheets"""

    model_config = ConfigDict(frozen=True)

    a: float = Field(1.0, gt=0, description="Intra-sheet bond length")
    h: float = Field(1.0, gt=0, description="Inter-sheet spacing")


class VertexClass(BaseModel):
    """
    Local-geometry label of a vertex

    i is the horizontal color (0 white, 1 black). j only exists on graphite:
    0 for sites that can jump to an adjacent sheet, 1 otherwise.
    """

    model_config = ConfigDict(frozen=True)

    i: int = Field(..., ge=0, le=1)
    j: Optional[int] = Field(None, ge=0, le=1)

    @property
    def i_sign(self) -> int:
        return 1 - 2 * self.i

    @property
    def epsilon(self) -> int:
        return self.i_sign

    @property
    def j_sign(self) -> int:
        if self.j is None:
            raise AttributeError("ice vertex classes carry no j bit")
        return 1 - 2 * self.j

    @property
    def k_sign(self) -> int:
        return self.i_sign * self.j_sign

    @property
    def signs(self) -> Tuple[int, ...]:
        """(epsilon,) on ice, (i_n, j_n, k_n) on graphite"""
        if self.j is None:
            return (self.i_sign,)
        return (self.i_sign, self.j_sign, self.k_sign)

    @property
    def index(self) -> int:
        """Row index into per-class tables"""
        return self.i if self.j is None else self.i + 2 * self.j

    @property
    def label(self) -> str:
        if self.j is None:
            return f"V_{self.i}"
        return f"V_{{{self.i},{self.j}}}"

    def fits(self, kind: LatticeKind) -> bool:
        return (self.j is None) == (kind is LatticeKind.ICE)


class LatticeState(BaseModel):
    """Exact integer description of the walker's vertex"""

    model_config = ConfigDict(frozen=True)

    cell_k: int = 0
    cell_l: int = 0
    sheet_n: int = 0
    vertex_class: VertexClass

    @model_validator(mode="after")
    def check_index_range(self) -> "LatticeState":
        """Indices stay far inside 64-bit range"""
        limit = 1 << 62
        for name in ("cell_k", "cell_l", "sheet_n"):
            if abs(getattr(self, name)) >= limit:
                raise ValueError(f"{name} exceeds 2^62")
        return self
