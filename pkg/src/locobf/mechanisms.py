"""Obfuscation matrices for the three schemes, plus sklearn-style estimators.

All three schemes draw the reported location from an exponential mechanism
row: f(x'|x) is proportional to exp(-epsilon * d(x, x') / (2 * sens)) over
the whole domain.  Rows always normalize over every location (full-support
output); restricting the output support to the protection set would change
the normalizer and is deliberately not done.  The schemes differ only in
the sensitivity `sens` used per row:

* pive: each row uses the diameter of that location's own searched
  protection set.  This is the original two-phase scheme; because
  neighboring rows can use different sensitivities, its within-set
  privacy ratio is not actually bounded by exp(epsilon) (the audit module
  demonstrates this).
* uniform: every row uses the largest searched-set diameter, which restores
  the exp(epsilon) bound on every protection set.
* personalized: the domain is partitioned into disjoint groups and every
  row in a group uses that group's diameter (optionally with a per-group
  epsilon).

Sampling takes an explicit per-call seed so concurrent samplers never share
generator state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .domain import LocationDomain, PriorDistribution
from .pls import (
    DomainPartition,
    ProtectionLocationSet,
    SearchParams,
    partition_domain,
    pive_search,
)

_ROW_SUM_TOL = 1e-12

SCHEMES = ("pive", "uniform", "personalized")


@dataclass(frozen=True)
class ObfuscationMatrix:
    """Row-stochastic reporting distribution over the domain.

    Row order and column order both follow the domain's Hilbert rank order.
    `sensitivities` records the per-row scale actually used; `row_epsilons`
    differs from a constant vector only for personalized per-group overrides.
    """

    probs: np.ndarray
    scheme: str
    epsilon: float
    domain: LocationDomain
    sensitivities: np.ndarray
    row_epsilons: np.ndarray

    def __post_init__(self):
        n = len(self.domain)
        if self.probs.shape != (n, n):
            raise ValueError(f"matrix shape {self.probs.shape} != ({n}, {n})")
        if np.any(self.probs < 0):
            raise ValueError("matrix entries must be non-negative")
        bad = np.abs(self.probs.sum(axis=1) - 1.0) > _ROW_SUM_TOL
        if np.any(bad):
            raise ValueError(f"rows {np.where(bad)[0]} do not sum to 1")
        self.probs.setflags(write=False)

    def row(self, loc_id: int) -> np.ndarray:
        return self.probs[self.domain.index_of(loc_id)]


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme tag plus search knobs; group_epsilons only for personalized."""

    scheme: str
    params: SearchParams
    group_epsilons: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.group_epsilons is not None and self.scheme != "personalized":
            raise ValueError("per-group epsilons are only valid for personalized")


def _mechanism_row(dists: np.ndarray, epsilon: float, sensitivity: float) -> np.ndarray:
    """One exponential-mechanism row; degenerates to a point mass at d=0."""
    if sensitivity == 0.0:
        row = np.zeros_like(dists)
        row[dists == 0.0] = 1.0
        return row / row.sum()
    weights = np.exp(-epsilon * dists / (2.0 * sensitivity))
    return weights / weights.sum()


def _build(
    domain: LocationDomain,
    scheme: str,
    epsilon: float,
    sensitivities: np.ndarray,
    row_epsilons: np.ndarray,
) -> ObfuscationMatrix:
    dm = domain.distance_matrix()
    probs = np.vstack(
        [
            _mechanism_row(dm[i], row_epsilons[i], sensitivities[i])
            for i in range(len(domain))
        ]
    )
    return ObfuscationMatrix(
        probs=probs,
        scheme=scheme,
        epsilon=epsilon,
        domain=domain,
        sensitivities=sensitivities,
        row_epsilons=row_epsilons,
    )


def search_all(
    domain: LocationDomain, prior: PriorDistribution, params: SearchParams
) -> dict[int, ProtectionLocationSet]:
    """Run the windowed search for every location (propagates infeasibility)."""
    return {loc_id: pive_search(loc_id, params, domain, prior) for loc_id in domain.ids}


def build_pive_matrix(
    domain: LocationDomain,
    prior: PriorDistribution,
    params: SearchParams,
    pls_by_location: dict[int, ProtectionLocationSet] | None = None,
) -> ObfuscationMatrix:
    """Row x uses the diameter of x's own searched protection set."""
    pls_by_location = pls_by_location or search_all(domain, prior, params)
    sens = np.array([pls_by_location[i].diameter_km for i in domain.ids])
    eps = np.full(len(domain), params.epsilon)
    return _build(domain, "pive", params.epsilon, sens, eps)


def build_uniform_matrix(
    domain: LocationDomain,
    prior: PriorDistribution,
    params: SearchParams,
    pls_by_location: dict[int, ProtectionLocationSet] | None = None,
) -> ObfuscationMatrix:
    """Every row uses the maximum searched-set diameter (set ranges unchanged)."""
    pls_by_location = pls_by_location or search_all(domain, prior, params)
    d_max = max(p.diameter_km for p in pls_by_location.values())
    sens = np.full(len(domain), d_max)
    eps = np.full(len(domain), params.epsilon)
    return _build(domain, "uniform", params.epsilon, sens, eps)


def build_personalized_matrix(
    domain: LocationDomain,
    prior: PriorDistribution,
    partition: DomainPartition,
    config: SchemeConfig,
) -> ObfuscationMatrix:
    """Each row uses the diameter (and epsilon) of its partition group."""
    if config.scheme != "personalized":
        raise ValueError(f"config.scheme must be 'personalized', got {config.scheme!r}")
    n_groups = len(partition.groups)
    group_eps = config.group_epsilons or tuple([config.params.epsilon] * n_groups)
    if len(group_eps) != n_groups:
        raise ValueError(
            f"{len(group_eps)} group epsilons for {n_groups} partition groups"
        )
    sens = np.empty(len(domain))
    eps = np.empty(len(domain))
    covered = 0
    for k, group in enumerate(partition.groups):
        for loc_id in group.members:
            i = domain.index_of(loc_id)
            sens[i] = group.diameter_km
            eps[i] = group_eps[k]
            covered += 1
    if covered != len(domain):
        raise ValueError("partition does not cover the domain exactly once")
    return _build(domain, "personalized", config.params.epsilon, sens, eps)


def save_matrix(
    matrix: ObfuscationMatrix,
    csv_path,
    sidecar_path,
    e_m: float | None = None,
) -> None:
    """Dump a matrix: CSV whose header is the pseudo-location ids with one
    row per true location (rank order), plus a JSON sidecar recording the
    scheme, epsilon, E_m, and per-row sensitivities."""
    import json
    from pathlib import Path

    ids = matrix.domain.ids
    lines = [",".join(str(i) for i in ids)]
    for row in matrix.probs:
        lines.append(",".join(f"{p:.17g}" for p in row))
    Path(csv_path).write_text("\n".join(lines) + "\n")
    sidecar = {
        "scheme": matrix.scheme,
        "epsilon": matrix.epsilon,
        "E_m": e_m,
        "sensitivities": [float(s) for s in matrix.sensitivities],
    }
    Path(sidecar_path).write_text(json.dumps(sidecar, indent=2))


def sample_pseudo(
    matrix: ObfuscationMatrix,
    true_location: int,
    seed: int | np.random.Generator,
    size: int | None = None,
) -> int | np.ndarray:
    """Inverse-CDF draw(s) of a reported location id; deterministic per seed."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    row = matrix.row(true_location)
    cdf = np.cumsum(row)
    u = rng.random(size if size is not None else 1)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(row) - 1)  # guard the u ~ 1.0 edge
    ids = np.array(matrix.domain.ids)[idx]
    return ids if size is not None else int(ids[0])


class BaseObfuscationMechanism(BaseEstimator, TransformerMixin):
    """Shared fit/transform/sample plumbing for the three schemes.

    fit(domain, prior) builds the full reporting matrix; transform(X) maps an
    array of location ids to their reporting distributions (rows); sample(X,
    seed) draws reported ids.  The prior defaults to domain.prior.
    """

    def __init__(self, epsilon=1.0, e_m=0.15, search_range=3):
        self.epsilon = epsilon
        self.e_m = e_m
        self.search_range = search_range

    def _params(self) -> SearchParams:
        return SearchParams(epsilon=self.epsilon, e_m=self.e_m, range=self.search_range)

    def _resolve_prior(self, domain, prior) -> PriorDistribution:
        prior = prior if prior is not None else domain.prior
        if prior is None:
            raise ValueError("no prior given and the domain carries none")
        return prior

    def fit(self, domain: LocationDomain, prior: PriorDistribution | None = None):
        raise NotImplementedError

    def transform(self, X) -> np.ndarray:
        rows = [self.matrix_.row(loc_id) for loc_id in np.atleast_1d(X)]
        return np.vstack(rows)

    def sample(self, X, seed: int | np.random.Generator):
        rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
        return np.array(
            [sample_pseudo(self.matrix_, int(loc_id), rng) for loc_id in np.atleast_1d(X)]
        )


class PiveMechanism(BaseObfuscationMechanism):
    """Two-phase scheme with per-location searched sets (known-broken DP)."""

    def fit(self, domain, prior=None):
        prior = self._resolve_prior(domain, prior)
        params = self._params()
        self.pls_by_location_ = search_all(domain, prior, params)
        self.matrix_ = build_pive_matrix(domain, prior, params, self.pls_by_location_)
        return self


class UniformSensitivityMechanism(BaseObfuscationMechanism):
    """Corrected scheme: one shared sensitivity, the largest set diameter."""

    def fit(self, domain, prior=None):
        prior = self._resolve_prior(domain, prior)
        params = self._params()
        self.pls_by_location_ = search_all(domain, prior, params)
        self.d_max_ = max(p.diameter_km for p in self.pls_by_location_.values())
        self.matrix_ = build_uniform_matrix(domain, prior, params, self.pls_by_location_)
        return self


class PersonalizedSensitivityMechanism(BaseObfuscationMechanism):
    """Corrected scheme: disjoint groups, one sensitivity per group."""

    def __init__(self, epsilon=1.0, e_m=0.15, search_range=3, group_epsilons=None):
        super().__init__(epsilon=epsilon, e_m=e_m, search_range=search_range)
        self.group_epsilons = group_epsilons

    def fit(self, domain, prior=None):
        prior = self._resolve_prior(domain, prior)
        params = self._params()
        self.partition_ = partition_domain(params, domain, prior)
        config = SchemeConfig(
            scheme="personalized",
            params=params,
            group_epsilons=tuple(self.group_epsilons) if self.group_epsilons else None,
        )
        self.matrix_ = build_personalized_matrix(domain, prior, self.partition_, config)
        return self
