"""Protection location sets: scoring, windowed search, and partitioning.

A protection location set (PLS) is a run of locations that are consecutive
in Hilbert rank.  Two prior-only scores drive feasibility:

* e_score(S): expected distance from the best guess **inside** S to a
  location drawn from the prior restricted to S.
* e_prime_score(S): same, but the guess ranges over the whole domain, so it
  can only be lower.

A set S is feasible at privacy level epsilon and error floor e_m when its
score is at least exp(epsilon) * e_m.  The windowed search uses e_score (the
original two-phase scheme); the partitioner uses the stricter e_prime_score,
which is what makes the error floor actually hold against an unrestricted
attacker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import LocationDomain, PriorDistribution


class NoFeasibleSetError(Exception):
    """No window within the search range satisfies the score threshold."""

    def __init__(self, location_id: int, threshold: float):
        self.location_id = location_id
        self.threshold = threshold
        super().__init__(
            f"no feasible protection set for location {location_id} "
            f"(threshold {threshold:.6g})"
        )


class InfeasiblePartitionError(Exception):
    """Even the whole domain fails the partition score threshold."""


@dataclass(frozen=True)
class SearchParams:
    """Privacy knobs: epsilon, error floor e_m, and rank search half-width."""

    epsilon: float
    e_m: float
    range: int = 3

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.e_m < 0:
            raise ValueError(f"e_m must be non-negative, got {self.e_m}")
        if self.range < 1:
            raise ValueError(f"range must be a positive integer, got {self.range}")

    @property
    def threshold(self) -> float:
        """Feasibility threshold exp(epsilon) * e_m."""
        return math.exp(self.epsilon) * self.e_m


@dataclass(frozen=True)
class ProtectionLocationSet:
    """A rank-contiguous member set with its diameter and scores."""

    members: tuple[int, ...]
    diameter_km: float
    e_score: float
    e_prime_score: float

    def __post_init__(self):
        if not self.members:
            raise ValueError("protection set must have at least one member")


@dataclass(frozen=True)
class DomainPartition:
    """Disjoint rank-contiguous groups covering the whole domain."""

    groups: tuple[ProtectionLocationSet, ...]

    def group_index_of(self, loc_id: int) -> int:
        for k, group in enumerate(self.groups):
            if loc_id in group.members:
                return k
        raise KeyError(f"location {loc_id} not covered by partition")

    def group_of(self, loc_id: int) -> ProtectionLocationSet:
        return self.groups[self.group_index_of(loc_id)]


def _member_indices(members: Sequence[int], domain: LocationDomain) -> np.ndarray:
    return np.array([domain.index_of(m) for m in members], dtype=int)


def diameter(members: Sequence[int], domain: LocationDomain) -> float:
    """Largest pairwise distance among members (0 for a singleton)."""
    idx = _member_indices(members, domain)
    return float(domain.distance_matrix()[np.ix_(idx, idx)].max())


def _restricted_expected_distances(
    members: Sequence[int],
    prior: PriorDistribution,
    domain: LocationDomain,
    anchor_indices: np.ndarray,
) -> np.ndarray:
    """Expected distance to each anchor under the prior restricted to members."""
    idx = _member_indices(members, domain)
    weights = prior.probs[idx]
    weights = weights / weights.sum()
    dm = domain.distance_matrix()
    return dm[np.ix_(anchor_indices, idx)] @ weights


def e_score(
    members: Sequence[int], prior: PriorDistribution, domain: LocationDomain
) -> float:
    """Best-guess-inside expected distance; 0 for singletons."""
    idx = _member_indices(members, domain)
    return float(_restricted_expected_distances(members, prior, domain, idx).min())


def e_prime_score(
    members: Sequence[int], prior: PriorDistribution, domain: LocationDomain
) -> float:
    """Best-guess-anywhere expected distance; never exceeds e_score."""
    anchors = np.arange(len(domain))
    return float(
        _restricted_expected_distances(members, prior, domain, anchors).min()
    )


def make_pls(
    members: Sequence[int], prior: PriorDistribution, domain: LocationDomain
) -> ProtectionLocationSet:
    """Bundle a member set with its diameter and both scores."""
    return ProtectionLocationSet(
        members=tuple(members),
        diameter_km=diameter(members, domain),
        e_score=e_score(members, prior, domain),
        e_prime_score=e_prime_score(members, prior, domain),
    )


def pive_search(
    x: int,
    params: SearchParams,
    domain: LocationDomain,
    prior: PriorDistribution,
) -> ProtectionLocationSet:
    """Smallest-diameter feasible rank window around location x.

    Enumerates every contiguous rank window containing x whose endpoints lie
    within params.range of x's rank, keeps those with
    e_score >= exp(epsilon) * e_m, and returns the one with the smallest
    diameter.  Ties break toward fewer members, then the smaller left
    endpoint.  Raises NoFeasibleSetError when no window qualifies; the range
    is never widened silently.
    """
    rho = domain.index_of(x)
    lo = max(0, rho - params.range)
    hi = min(len(domain) - 1, rho + params.range)
    ids = domain.ids
    threshold = params.threshold

    best: tuple[float, int, int] | None = None  # (diameter, size, left)
    best_members: tuple[int, ...] | None = None
    dm = domain.distance_matrix()
    for left in range(lo, rho + 1):
        for right in range(rho, hi + 1):
            window = np.arange(left, right + 1)
            diam = float(dm[np.ix_(window, window)].max())
            key = (diam, right - left + 1, left)
            if best is not None and key >= best:
                continue
            members = ids[left : right + 1]
            if e_score(members, prior, domain) >= threshold:
                best = key
                best_members = members
    if best_members is None:
        raise NoFeasibleSetError(x, threshold)
    return make_pls(best_members, prior, domain)


def partition_domain(
    params: SearchParams,
    domain: LocationDomain,
    prior: PriorDistribution,
) -> DomainPartition:
    """Split the domain into rank-contiguous groups, each feasible by e'.

    Greedy left-to-right scan over ranks: grow the current group until
    e_prime_score >= exp(epsilon) * e_m, then close it.  A trailing group
    that cannot reach the threshold is merged backwards into its predecessor
    (repeatedly, if needed).  Raises InfeasiblePartitionError when even the
    whole domain falls short.
    """
    ids = domain.ids
    threshold = params.threshold

    closed: list[tuple[int, ...]] = []
    current: list[int] = []
    for loc_id in ids:
        current.append(loc_id)
        if e_prime_score(current, prior, domain) >= threshold:
            closed.append(tuple(current))
            current = []

    if current:
        # trailing remainder: fold predecessors in until feasible
        tail = tuple(current)
        while e_prime_score(tail, prior, domain) < threshold:
            if not closed:
                raise InfeasiblePartitionError(
                    f"whole domain fails e_prime threshold {threshold:.6g}"
                )
            tail = closed.pop() + tail
        closed.append(tail)

    if not closed:
        raise InfeasiblePartitionError(
            f"whole domain fails e_prime threshold {threshold:.6g}"
        )
    return DomainPartition(
        groups=tuple(make_pls(group, prior, domain) for group in closed)
    )
