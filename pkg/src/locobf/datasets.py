"""Bundled example data.

The 50-region example is a synthetic layout on an 8x8 grid of 1 km cells,
built so that the textbook witness structure is present: location 5's
searched set is {5, 6} with diameter 2.0 km while location 6's is {6, 7}
with diameter 1.0 km, the prior entries for 5/6/7 are 0.0224/0.0153/0.0150,
and one isolated pair near the end of the curve produces the largest set
diameter.  The coordinates approximate the shape of a real 50-region
benchmark only loosely; treat them as a demo fixture, not as survey data.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .domain import LocationDomain, load_domain

BUNDLED_ORDER = 3
BUNDLED_CELL_SIZE_KM = 1.0


def bundled_regions_path() -> Path:
    """Filesystem path of the bundled 50-region CSV."""
    return Path(resources.files("locobf.data") / "regions50.csv")


def load_bundled_example() -> LocationDomain:
    """The 50-region example domain with its bundled prior."""
    return load_domain(bundled_regions_path(), BUNDLED_CELL_SIZE_KM, BUNDLED_ORDER)
