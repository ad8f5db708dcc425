"""
Pydantic schemas for verification reports
"""

import math
from datetime import datetime
from enum import Enum
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.stats import norm


def to_plain(value: Any) -> Any:
    """numpy arrays and scalars to JSON-ready Python values; non-finite floats become strings"""
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


class Tolerance(BaseModel):
    """Bounds used by every check"""

    exact_eps: float = Field(1e-9, gt=0, description="Pathwise algebraic identities")
    stat_z: float = Field(4.0, gt=0, description="z-score bound of statistical tests")
    cov_rel: float = Field(0.05, gt=0, description="Relative error bound on covariance entries")
    moment_abs: float = Field(0.1, gt=0, description="Bound on skewness and kurtosis deviations")

    @property
    def false_alarm(self) -> float:
        """Two-sided normal tail beyond stat_z, the per-test false-failure rate under the null"""
        return float(2.0 * norm.sf(self.stat_z))


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    FLAGGED = "flagged"


class VerificationReport(BaseModel):
    """Outcome of one check"""

    check: str = Field(..., description="Check name")
    status: CheckStatus
    observed: Optional[Any] = None
    target: Optional[Any] = None
    tolerance: Optional[float] = None
    residual: Optional[float] = None
    seed: Optional[int] = None
    n: Optional[int] = None
    replicates: Optional[int] = None
    detail: Optional[str] = None

    @field_validator("observed", "target", mode="before")
    @classmethod
    def convert_arrays(cls, value: Any) -> Any:
        """Convert numpy values to plain lists and floats"""
        return to_plain(value)

    @field_validator("tolerance", "residual", mode="before")
    @classmethod
    def convert_scalar(cls, value: Any) -> Optional[float]:
        if value is None:
            return None
        return float(value)

    @model_validator(mode="after")
    def check_failure_populated(self) -> "VerificationReport":
        if self.status is CheckStatus.FAIL and (self.observed is None or self.target is None or self.tolerance is None):
            raise ValueError(f"failed check {self.check} must carry observed, target and tolerance")
        return self

    @property
    def failed(self) -> bool:
        return self.status is CheckStatus.FAIL


class ReportMetadata(BaseModel):
    """Run metadata; only generated_at changes between identical runs"""

    version: str
    generated_at: datetime
    lattice: str
    seed: Optional[int] = None


class ReportDocument(BaseModel):
    """Report file written by `verify` and `selftest`"""

    metadata: ReportMetadata
    reports: List[VerificationReport]

    @field_validator("reports", mode="after")
    @classmethod
    def sort_by_check(cls, value: List[VerificationReport]) -> List[VerificationReport]:
        return sorted(value, key=lambda r: r.check)

    @property
    def failed(self) -> bool:
        return any(r.failed for r in self.reports)
