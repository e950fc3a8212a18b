"""Finite-difference rows with analytic elimination of y-direction ghosts.

All operators are centred and second-order.  On the field-line boundaries
(y = 0, y = 1, and y = l above the limiter) the conditions d_y phi = 0 and
d_y^3 phi = 0 close the stencils: the first, centred, gives the mirror
phi[-1] = phi[1]; combining it with the centred four-point third difference
(phi[2] - 2 phi[1] + 2 phi[-1] - phi[-2]) / (2 dy^3) = 0 gives
phi[-2] = phi[2].  Folding both mirrors into the interior stencils yields

    d''   at the wall: (-2, 2) / dy^2
    d'''' at the wall: (6, -8, 2) / dy^4,  one row in: (-4, 7, -4, 1) / dy^4

and their mirror images at the top.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GridTooCoarseError
from .geometry import Grid


@dataclass(frozen=True)
class StencilRow:
    """Sparse row: (unknown index, coefficient) pairs, index-sorted, merged."""

    entries: tuple[tuple[int, float], ...]

    def apply(self, u) -> float:
        return sum(c * u[k] for k, c in self.entries)

    def __iter__(self):
        return iter(self.entries)


def _make_row(pairs) -> StencilRow:
    acc: dict[int, float] = {}
    for k, c in pairs:
        acc[k] = acc.get(k, 0.0) + c
    return StencilRow(tuple(sorted(acc.items())))


def dx_central_row(grid: Grid, field: int, i: int, j: int) -> StencilRow:
    """First x-derivative, centred: (-1, +1) / (2 dx) at (i-1, i+1)."""
    left, right = grid.x_neighbors(i, j)
    h = 1.0 / (2.0 * grid.dx)
    return _make_row([(grid.slot(field, left, j), -h), (grid.slot(field, right, j), h)])


def dxx_row(grid: Grid, field: int, i: int, j: int) -> StencilRow:
    """Second x-derivative, centred: (1, -2, 1) / dx^2; periodic wrap on band rows."""
    left, right = grid.x_neighbors(i, j)
    c = 1.0 / grid.dx**2
    return _make_row(
        [
            (grid.slot(field, left, j), c),
            (grid.slot(field, i, j), -2.0 * c),
            (grid.slot(field, right, j), c),
        ]
    )


def _dyy_offsets(j: int, jb: int, jt: int) -> list[tuple[int, float]]:
    if j == jb:
        return [(0, -2.0), (1, 2.0)]
    if j == jt:
        return [(-1, 2.0), (0, -2.0)]
    return [(-1, 1.0), (0, -2.0), (1, 1.0)]


def _dyyyy_offsets(j: int, jb: int, jt: int) -> list[tuple[int, float]]:
    if j == jb:
        return [(0, 6.0), (1, -8.0), (2, 2.0)]
    if j == jb + 1:
        return [(-1, -4.0), (0, 7.0), (1, -4.0), (2, 1.0)]
    if j == jt:
        return [(-2, 2.0), (-1, -8.0), (0, 6.0)]
    if j == jt - 1:
        return [(-2, 1.0), (-1, -4.0), (0, 7.0), (1, -4.0)]
    return [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)]


def dyy_row(grid: Grid, field: int, i: int, j: int) -> StencilRow:
    """Second y-derivative with the mirror closure on the field-line walls."""
    jb, jt = grid.column_extent(i)
    c = 1.0 / grid.dy**2
    return _make_row(
        [(grid.slot(field, i, j + dj), w * c) for dj, w in _dyy_offsets(j, jb, jt)]
    )


def dyyyy_row(grid: Grid, field: int, i: int, j: int) -> StencilRow:
    """Fourth y-derivative with the two-ghost mirror closure on the walls."""
    jb, jt = grid.column_extent(i)
    if jt - jb + 1 < 5:
        raise GridTooCoarseError(
            f"column i={i} has {jt - jb + 1} rows; the fourth difference needs 5"
        )
    c = 1.0 / grid.dy**4
    return _make_row(
        [(grid.slot(field, i, j + dj), w * c) for dj, w in _dyyyy_offsets(j, jb, jt)]
    )
