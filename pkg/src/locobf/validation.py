"""Input validation helpers shared by the public entry points."""

from __future__ import annotations

from typing import Sequence

from .domain import LocationDomain, PriorDistribution


def check_prior_aligned(
    domain: LocationDomain, prior: PriorDistribution
) -> PriorDistribution:
    """Ensure the prior has one entry per domain location."""
    if len(prior) != len(domain):
        raise ValueError(
            f"prior has {len(prior)} entries for {len(domain)} locations"
        )
    return prior


def check_members(domain: LocationDomain, members: Sequence[int]) -> list[int]:
    """Ensure a non-empty member list of known location ids."""
    members = list(members)
    if not members:
        raise ValueError("member set must be non-empty")
    unknown = [m for m in members if m not in domain.hilbert_rank]
    if unknown:
        raise ValueError(f"unknown location ids {unknown}")
    return members
