"""
File export helpers
"""

import csv
import logging
from pathlib import Path

from pydantic import BaseModel

from crystalwalk.core.errors import DomainError
from crystalwalk.models.lattice import GeometryParams
from crystalwalk.models.walk import WalkRecord
from crystalwalk.services.lattice import position
from crystalwalk.services.walker import trajectory_states

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("step", "x", "y", "z", "i", "j", "k_sign")


def write_trajectory_csv(record: WalkRecord, geometry: GeometryParams, path: str) -> int:
    """
    Write a trajectory-mode record as CSV

    Sign columns hold +1/-1; j and k_sign stay empty on ice.

    Returns:
        Number of rows written

    Raises:
        DomainError: If the record kept no trajectory
    """
    if record.trajectory is None:
        raise DomainError("record was simulated in summary mode; no trajectory to export")
    rows = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_COLUMNS)
        for step, state in enumerate(trajectory_states(record)):
            x, y, z = position(state, geometry, record.kind)
            vc = state.vertex_class
            if vc.j is None:
                signs = (vc.i_sign, "", "")
            else:
                signs = (vc.i_sign, vc.j_sign, vc.k_sign)
            writer.writerow((step, repr(float(x)), repr(float(y)), repr(float(z)), *signs))
            rows += 1
    logger.info(f"wrote {rows} trajectory rows to {path}")
    return rows


def write_json(document: BaseModel, path: str) -> None:
    """Write a schema instance as indented JSON"""
    Path(path).write_text(document.model_dump_json(indent=2) + "\n")
    logger.info(f"wrote {path}")
