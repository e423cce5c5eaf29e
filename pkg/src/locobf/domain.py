"""Discrete location universe: grid cells, distances, and priors.

A domain is a finite set of occupied cells on a 2^order x 2^order grid with
a fixed cell size in kilometers.  Cell centers define coordinates, so two
horizontally adjacent 1 km cells are exactly 1 km apart.  Locations are
stored in Hilbert-curve order, so a location's list index equals its curve
rank.  Domains and priors are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hilbert import hilbert_value

_PRIOR_TOL = 1e-12


@dataclass(frozen=True)
class Location:
    """One occupied grid cell."""

    id: int
    col: int
    row: int
    center: tuple[float, float]  # km


class PriorDistribution:
    """Adversary's prior over the domain, aligned with domain rank order."""

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("prior must be a non-empty vector")
        if np.any(probs <= 0):
            raise ValueError("prior entries must be strictly positive")
        if abs(probs.sum() - 1.0) > _PRIOR_TOL:
            raise ValueError(f"prior must sum to 1, got {probs.sum()!r}")
        self._probs = probs
        self._probs.setflags(write=False)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def __len__(self) -> int:
        return self._probs.size

    def __getitem__(self, index: int) -> float:
        return float(self._probs[index])

    def __eq__(self, other) -> bool:
        return isinstance(other, PriorDistribution) and np.array_equal(
            self._probs, other._probs
        )


class LocationDomain:
    """Occupied cells of a square grid, ranked along the Hilbert curve.

    Parameters
    ----------
    order : grid is 2^order x 2^order
    cell_size_km : positive edge length of one cell
    cells : iterable of (id, col, row)
    weights : optional positive prior weights aligned with `cells`;
        normalized into `self.prior`
    """

    def __init__(self, order: int, cell_size_km: float, cells, weights=None):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if cell_size_km <= 0:
            raise ValueError(f"cell_size_km must be positive, got {cell_size_km}")
        cells = list(cells)
        if not cells:
            raise ValueError("domain must contain at least one location")

        n = 1 << order
        seen: set[int] = set()
        for loc_id, col, row in cells:
            if loc_id in seen:
                raise ValueError(f"duplicate location id {loc_id}")
            seen.add(loc_id)
            if not (0 <= col < n and 0 <= row < n):
                raise ValueError(
                    f"location {loc_id} at ({col}, {row}) outside {n}x{n} grid"
                )

        if weights is not None:
            weights = np.asarray(list(weights), dtype=float)
            if weights.size != len(cells):
                raise ValueError("weights length must match number of locations")
            if np.any(weights <= 0):
                raise ValueError("prior weights must be strictly positive")

        # canonical ordering: sort by curve value so rank == list index
        values = [hilbert_value(col, row, order) for _, col, row in cells]
        perm = np.argsort(values, kind="stable")

        self.order = order
        self.cell_size_km = float(cell_size_km)
        self.locations: tuple[Location, ...] = tuple(
            Location(
                id=cells[i][0],
                col=cells[i][1],
                row=cells[i][2],
                center=(
                    (cells[i][1] + 0.5) * cell_size_km,
                    (cells[i][2] + 0.5) * cell_size_km,
                ),
            )
            for i in perm
        )
        self.hilbert_rank: dict[int, int] = {
            loc.id: rank for rank, loc in enumerate(self.locations)
        }
        self.centers = np.array([loc.center for loc in self.locations])
        self.centers.setflags(write=False)
        self.prior: PriorDistribution | None = (
            PriorDistribution(weights[perm] / weights.sum())
            if weights is not None
            else None
        )
        self._distance_matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.locations)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(loc.id for loc in self.locations)

    def index_of(self, loc_id: int) -> int:
        """Rank (== index) of a location id."""
        return self.hilbert_rank[loc_id]

    def location(self, loc_id: int) -> Location:
        return self.locations[self.hilbert_rank[loc_id]]

    def distance_matrix(self) -> np.ndarray:
        """Pairwise Euclidean distances (km) in rank order; cached."""
        if self._distance_matrix is None:
            delta = self.centers[:, None, :] - self.centers[None, :, :]
            dm = np.sqrt((delta**2).sum(axis=2))
            dm.setflags(write=False)
            self._distance_matrix = dm
        return self._distance_matrix

    def diameter(self) -> float:
        """Largest pairwise distance; 0 for a singleton."""
        return float(self.distance_matrix().max())


def distance(a: Location, b: Location) -> float:
    """Euclidean distance between cell centers, in km."""
    dx = a.center[0] - b.center[0]
    dy = a.center[1] - b.center[1]
    return float(np.hypot(dx, dy))


def load_domain(regions_file, cell_size_km: float, order: int) -> LocationDomain:
    """Load a domain from a regions CSV with header id,col,row[,weight].

    A weight column, when present, is normalized into the returned domain's
    prior.  Raises ValueError on duplicate ids, off-grid coordinates, or
    non-positive weights.
    """
    path = Path(regions_file)
    cells: list[tuple[int, int, int]] = []
    weights: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "col", "row"} <= set(
            reader.fieldnames
        ):
            raise ValueError(
                f"{path}: expected CSV header with id,col,row[,weight]"
            )
        has_weight = "weight" in reader.fieldnames
        for record in reader:
            cells.append((int(record["id"]), int(record["col"]), int(record["row"])))
            if has_weight:
                weights.append(float(record["weight"]))
    return LocationDomain(
        order=order,
        cell_size_km=cell_size_km,
        cells=cells,
        weights=weights if weights else None,
    )


def save_domain(domain: LocationDomain, regions_file) -> None:
    """Write a domain back to the regions CSV format (rank order)."""
    path = Path(regions_file)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if domain.prior is not None:
            writer.writerow(["id", "col", "row", "weight"])
            for loc, w in zip(domain.locations, domain.prior.probs):
                writer.writerow([loc.id, loc.col, loc.row, repr(float(w))])
        else:
            writer.writerow(["id", "col", "row"])
            for loc in domain.locations:
                writer.writerow([loc.id, loc.col, loc.row])


def domain_to_json(domain: LocationDomain) -> str:
    """JSON dump with fields order, cell_size_km, locations, prior."""
    payload = {
        "order": domain.order,
        "cell_size_km": domain.cell_size_km,
        "locations": [
            {"id": loc.id, "col": loc.col, "row": loc.row}
            for loc in domain.locations
        ],
        "prior": None
        if domain.prior is None
        else [float(p) for p in domain.prior.probs],
    }
    return json.dumps(payload, indent=2)


def domain_from_json(text: str) -> LocationDomain:
    payload = json.loads(text)
    return LocationDomain(
        order=payload["order"],
        cell_size_km=payload["cell_size_km"],
        cells=[(loc["id"], loc["col"], loc["row"]) for loc in payload["locations"]],
        weights=payload.get("prior"),
    )


def random_prior(
    domain: LocationDomain, low: float, high: float, seed: int
) -> PriorDistribution:
    """Draw one weight per location uniformly from [low, high] and normalize.

    Deterministic per seed.
    """
    if not 0 < low <= high:
        raise ValueError(f"need 0 < low <= high, got [{low}, {high}]")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(low, high, size=len(domain))
    return PriorDistribution(raw / raw.sum())
