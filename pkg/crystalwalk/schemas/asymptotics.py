"""
Pydantic schemas for asymptotics output
"""

from typing import Any, List, Optional

from pydantic import BaseModel, Field, field_validator

from crystalwalk.models.summary import AsymptoticSummary
from crystalwalk.schemas.report import to_plain

Vector = List[float]
Matrix = List[List[float]]


class AsymptoticsResponse(BaseModel):
    """Every limit object of a walk as plain lists"""

    lattice: str
    p: float
    alpha: float
    a: float
    h: float
    mu: Vector
    theta: Vector
    m: Optional[Vector] = Field(None, description="Graphite only")
    rho: Optional[Vector] = Field(None, description="Graphite only")
    zeta: Vector
    sigma2: Matrix
    nu: Matrix
    gamma: Optional[Matrix] = Field(None, description="Graphite only")
    delta: Optional[Matrix] = Field(None, description="Graphite only")
    Gamma: Matrix
    Lambda: Matrix
    lln_limit: Vector
    counter_limits: Vector
    cancellation_flag: bool = False

    @field_validator(
        "mu", "theta", "m", "rho", "zeta", "sigma2", "nu", "gamma", "delta", "Gamma", "Lambda", "lln_limit", "counter_limits",
        mode="before",
    )
    @classmethod
    def convert_arrays(cls, value: Any) -> Any:
        """Convert numpy arrays to nested lists"""
        return to_plain(value)

    @classmethod
    def from_summary(cls, summary: AsymptoticSummary) -> "AsymptoticsResponse":
        return cls(
            lattice=summary.kind.value,
            p=summary.p,
            alpha=summary.alpha,
            a=summary.geometry.a,
            h=summary.geometry.h,
            cancellation_flag=summary.cancellation_flag,
            **summary.coefficients(),
        )
