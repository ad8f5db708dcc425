"""
Pydantic schemas for simulation output
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, field_validator

from crystalwalk.models.walk import WalkRecord
from crystalwalk.schemas.report import to_plain


class StateResponse(BaseModel):
    cell_k: int
    cell_l: int
    sheet_n: int
    i: int
    j: Optional[int] = None


class WalkResponse(BaseModel):
    """Final state, position, counters and ledger of one path"""

    lattice: str
    steps: int
    seed: int
    stream_id: int
    state: StateResponse
    S: List[float]
    counters: List[int]
    ledger: Optional[Dict[str, Any]] = None

    @field_validator("S", "counters", mode="before")
    @classmethod
    def convert_arrays(cls, value: Any) -> Any:
        """Convert numpy arrays to plain lists"""
        return to_plain(value)

    @classmethod
    def from_record(cls, record: WalkRecord) -> "WalkResponse":
        ledger = None
        if record.ledger is not None:
            ledger = {"M": to_plain(record.ledger.M), "R": to_plain(record.ledger.R), "N": to_plain(record.ledger.N)}
            ledger.update({f"bracket_{k}": to_plain(v) for k, v in record.ledger.brackets.items()})
        vc = record.state.vertex_class
        return cls(
            lattice=record.kind.value,
            steps=record.steps,
            seed=record.seed,
            stream_id=record.stream_id,
            state=StateResponse(
                cell_k=record.state.cell_k, cell_l=record.state.cell_l, sheet_n=record.state.sheet_n, i=vc.i, j=vc.j
            ),
            S=record.S,
            counters=record.counters,
            ledger=ledger,
        )
