"""Hilbert space-filling curve indexing for square grids.

Maps cells of a 2^order x 2^order grid to positions along a Hilbert curve
and back.  The curve orientation is fixed: at order 1 the traversal is
(0,0) -> (0,1) -> (1,1) -> (1,0).  Consecutive curve positions are always
grid-adjacent, which is the clustering property the protection-set search
relies on; any of the rotated/reflected orientations would preserve it, so
downstream results are orientation-invariant in distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .domain import LocationDomain


def _check_order(order: int) -> None:
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")


def hilbert_value(col: int, row: int, order: int) -> int:
    """Curve position of cell (col, row) on the 2^order grid.

    Raises ValueError for coordinates outside the grid.
    """
    _check_order(order)
    n = 1 << order
    if not (0 <= col < n and 0 <= row < n):
        raise ValueError(f"cell ({col}, {row}) outside {n}x{n} grid")
    x, y = col, row
    value = 0
    s = n >> 1
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        value += s * s * ((3 * rx) ^ ry)
        # rotate/flip the quadrant so the recursion sees a canonical frame
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        s >>= 1
    return value


def hilbert_inverse(value: int, order: int) -> tuple[int, int]:
    """Cell (col, row) at curve position `value`; inverse of hilbert_value."""
    _check_order(order)
    n = 1 << order
    if not (0 <= value < n * n):
        raise ValueError(f"value {value} outside [0, {n * n})")
    x = y = 0
    t = value
    s = 1
    while s < n:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s <<= 1
    return x, y


@dataclass(frozen=True)
class RankTable:
    """Positions of a domain's locations in Hilbert-sorted order.

    rank maps location id -> 0-based position; ordered_ids lists the ids by
    increasing curve value.
    """

    rank: dict[int, int]
    ordered_ids: tuple[int, ...]


def rank_locations(cells: dict[int, tuple[int, int]], order: int) -> RankTable:
    """Rank arbitrary (id -> (col, row)) cells by their curve values."""
    by_value = sorted(cells, key=lambda i: hilbert_value(*cells[i], order))
    return RankTable(
        rank={loc_id: pos for pos, loc_id in enumerate(by_value)},
        ordered_ids=tuple(by_value),
    )


def rank_domain(domain: "LocationDomain") -> RankTable:
    """Rank a domain's locations along the curve.

    Ranks are contiguous 0..len-1 even when the occupied cells leave gaps in
    curve values (sparse domains).
    """
    return rank_locations(
        {loc.id: (loc.col, loc.row) for loc in domain.locations}, domain.order
    )
