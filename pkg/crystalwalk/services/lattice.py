"""
Exact integer arithmetic on the ice-1h and graphite-2h lattices

A vertex is stored as cell indices (k, l), a sheet index n and its class.
Real coordinates are derived on demand:

    x = a * (c + 3k/2),  y = a * sqrt(3) * (k/2 + l)
    z = h * n                    (ice)
    z = h * (2n + [i != j])      (graphite)

where the horizontal offset c is i on ice and (-1)^(i+1) * [j == 1] on graphite.
"""

import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from crystalwalk.core.config import settings
from crystalwalk.core.errors import DomainError, StructuralError
from crystalwalk.models.lattice import GeometryParams, LatticeKind, LatticeState, MoveLabel, VertexClass

SQRT3 = math.sqrt(3.0)

# (dk, dl) of H0, H1, H2 keyed by the color of the departure vertex
_HORIZONTAL_CELL_DELTAS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    0: ((0, 0), (-1, 1), (-1, 0)),
    1: ((0, 0), (1, -1), (1, 0)),
}

# Unit displacement of H0, H1, H2 from a white vertex; black vertices use the opposite vector
HORIZONTAL_DIRECTIONS: Tuple[Tuple[float, float], ...] = (
    (1.0, 0.0),
    (-0.5, SQRT3 / 2.0),
    (-0.5, -SQRT3 / 2.0),
)

_UNIT = GeometryParams(a=1.0, h=1.0)


def vertex_classes(kind: LatticeKind) -> Tuple[VertexClass, ...]:
    """All classes of a lattice, ordered by their table index"""
    if kind is LatticeKind.ICE:
        return (VertexClass(i=0), VertexClass(i=1))
    return tuple(VertexClass(i=i, j=j) for j in (0, 1) for i in (0, 1))


def origin(kind: LatticeKind) -> LatticeState:
    """The white starting vertex at (0, 0, 0)"""
    return LatticeState(vertex_class=vertex_classes(kind)[0])


def horizontal_offset(vertex_class: VertexClass, kind: LatticeKind) -> int:
    if kind is LatticeKind.ICE:
        return vertex_class.i
    if vertex_class.j == 0:
        return 0
    return -1 if vertex_class.i == 0 else 1


def altitude_index(state: LatticeState, kind: LatticeKind) -> int:
    """Sheet number of the state, i.e. z / h"""
    if kind is LatticeKind.ICE:
        return state.sheet_n
    vc = state.vertex_class
    return 2 * state.sheet_n + (1 if vc.i != vc.j else 0)


def position(state: LatticeState, geometry: GeometryParams, kind: LatticeKind) -> np.ndarray:
    """
    Real (x, y, z) coordinates of a state

    Args:
        state: Lattice state
        geometry: Bond length and sheet spacing
        kind: Lattice structure

    Returns:
        Array of shape (3,)
    """
    c = horizontal_offset(state.vertex_class, kind)
    k, l = state.cell_k, state.cell_l
    return np.array(
        [
            geometry.a * (c + 1.5 * k),
            geometry.a * SQRT3 * (0.5 * k + l),
            geometry.h * altitude_index(state, kind),
        ]
    )


def admissible_moves(vertex_class: VertexClass, kind: LatticeKind) -> Tuple[MoveLabel, ...]:
    if kind is LatticeKind.GRAPHITE and vertex_class.j == 1:
        return (MoveLabel.H0, MoveLabel.H1, MoveLabel.H2)
    return tuple(MoveLabel)


def inverse_move(move: MoveLabel) -> MoveLabel:
    """Move undoing `move` from the image vertex"""
    if move is MoveLabel.UP:
        return MoveLabel.DOWN
    if move is MoveLabel.DOWN:
        return MoveLabel.UP
    # H_j from one color is reversed by H_j from the other color
    return move


def apply_move(state: LatticeState, move: MoveLabel, kind: LatticeKind) -> LatticeState:
    """
    Neighbor reached from `state` by `move`

    Args:
        state: Departure state
        move: Move label
        kind: Lattice structure

    Returns:
        New state

    Raises:
        DomainError: If the move is not admissible from the state's class
    """
    vc = state.vertex_class
    if not vc.fits(kind):
        raise StructuralError(f"class {vc.label} does not belong to the {kind.value} lattice")
    k, l, n = state.cell_k, state.cell_l, state.sheet_n

    if move.is_vertical:
        step = 1 if move is MoveLabel.UP else -1
        if kind is LatticeKind.ICE:
            return state.model_copy(update={"sheet_n": n + step})
        if vc.j == 1:
            raise DomainError(f"vertical move {move.name} from {vc.label}: site cannot jump")
        # V_{0,0} sits on even sheets, V_{1,0} on odd ones; a vertical move swaps them
        if vc.i == 0:
            new_n = n if step == 1 else n - 1
        else:
            new_n = n + 1 if step == 1 else n
        return LatticeState(cell_k=k, cell_l=l, sheet_n=new_n, vertex_class=VertexClass(i=1 - vc.i, j=0))

    dk, dl = _HORIZONTAL_CELL_DELTAS[vc.i][move.direction]
    if kind is LatticeKind.ICE:
        new_class = VertexClass(i=1 - vc.i)
    else:
        new_class = VertexClass(i=1 - vc.i, j=1 - vc.j)
    return LatticeState(cell_k=k + dk, cell_l=l + dl, sheet_n=n, vertex_class=new_class)


def class_from_position(point: Sequence[float], geometry: GeometryParams, kind: LatticeKind) -> LatticeState:
    """
    Recover the integer state of a lattice point from its coordinates

    Raises:
        StructuralError: If the point is not a vertex of the lattice
    """
    x2 = 2.0 * point[0] / geometry.a
    y2 = 2.0 * point[1] / (geometry.a * SQRT3)
    zs = point[2] / geometry.h
    rx, ry, rz = round(x2), round(y2), round(zs)
    if max(abs(x2 - rx), abs(y2 - ry), abs(zs - rz)) > 1e-9 * max(1.0, abs(x2), abs(y2), abs(zs)):
        raise StructuralError(f"point {tuple(point)} is off the {kind.value} lattice")

    matches = []
    for vc in vertex_classes(kind):
        c = horizontal_offset(vc, kind)
        if (rx - 2 * c) % 3 != 0:
            continue
        k = (rx - 2 * c) // 3
        if (ry - k) % 2 != 0:
            continue
        l = (ry - k) // 2
        if kind is LatticeKind.ICE:
            n = rz
        else:
            odd = 1 if vc.i != vc.j else 0
            if (rz - odd) % 2 != 0:
                continue
            n = (rz - odd) // 2
        matches.append(LatticeState(cell_k=k, cell_l=l, sheet_n=n, vertex_class=vc))

    if len(matches) != 1:
        raise StructuralError(f"point {tuple(point)} matches {len(matches)} vertex classes")
    return matches[0]


def classify(
    state: LatticeState,
    kind: LatticeKind,
    verify_coordinates: Optional[bool] = None,
) -> VertexClass:
    """
    Vertex class of a state

    With coordinate verification (default: settings.DEBUG) the class is also
    re-derived from the embedded coordinates.

    Raises:
        StructuralError: If stored and re-derived classes disagree
    """
    vc = state.vertex_class
    if not vc.fits(kind):
        raise StructuralError(f"class {vc.label} does not belong to the {kind.value} lattice")
    if verify_coordinates is None:
        verify_coordinates = settings.DEBUG
    if verify_coordinates:
        recovered = class_from_position(position(state, _UNIT, kind), _UNIT, kind)
        if recovered != state:
            raise StructuralError(f"stored class {vc.label} but coordinates give {recovered.vertex_class.label}")
    return vc


def sign_variables(vertex_class: VertexClass) -> Tuple[int, ...]:
    """epsilon on ice; (i_n, j_n, k_n) on graphite"""
    return vertex_class.signs
