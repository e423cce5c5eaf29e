"""Bayesian adversary and the privacy/utility metrics built on it.

The adversary knows the prior and the reporting matrix.  Given an observed
pseudo-location x', it forms the posterior over true locations by Bayes rule
and guesses the location minimizing posterior-expected distance.  All
quantities here are exact sums over the finite domain; nothing is sampled.

Metric vocabulary (all distances in km):

* exp_er(x'): posterior-expected distance of the optimal guess given x'.
* expected_error: the x'-average of exp_er weighted by evidence.
* quality_loss: prior-expected distance between true and reported location.
* dop_er(S, x'): like exp_er but with the posterior renormalized within the
  set S; the guess still ranges over the whole domain.
* piv_er(S, x'): same renormalization, guess restricted to S, so
  piv_er >= dop_er always.
* violation_mass: probability mass of (x, x') pairs where dop_er of x's own
  protection set exceeds exp_er, i.e. where treating dop_er as a lower bound
  on the attacker's error would overstate the protection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import LocationDomain, PriorDistribution
from .mechanisms import ObfuscationMatrix

_STRICT_TOL = 1e-12


@dataclass(frozen=True)
class PosteriorRow:
    """Posterior over true locations for one observed pseudo-location."""

    x_prime: int
    probs: np.ndarray

    def __post_init__(self):
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("posterior must be a probability vector")
        self.probs.setflags(write=False)


@dataclass(frozen=True)
class MetricsReport:
    """Exact metrics for one matrix (and optionally its protection sets)."""

    scheme: str
    epsilon: float
    exp_er: np.ndarray  # per pseudo-location, rank order
    expected_error: float
    quality_loss: float
    violation_mass: float | None
    dop_er: np.ndarray | None  # [true location, pseudo-location]
    piv_er: np.ndarray | None

    @property
    def min_exp_er(self) -> float:
        return float(self.exp_er.min())


def _joint(matrix: ObfuscationMatrix, prior: PriorDistribution) -> np.ndarray:
    """Joint mass over (true, reported): pi(x) * f(x'|x)."""
    return prior.probs[:, None] * matrix.probs


def posterior(
    matrix: ObfuscationMatrix, prior: PriorDistribution, x_prime: int
) -> PosteriorRow:
    """Bayes update of the prior given one observed pseudo-location."""
    j = matrix.domain.index_of(x_prime)
    joint_col = prior.probs * matrix.probs[:, j]
    evidence = joint_col.sum()
    if evidence <= 0.0:
        raise ValueError(f"pseudo-location {x_prime} has zero evidence")
    return PosteriorRow(x_prime=x_prime, probs=joint_col / evidence)


def optimal_attack(
    post: PosteriorRow, domain: LocationDomain
) -> tuple[int, float]:
    """Best guess and its posterior-expected distance; ties -> smallest id."""
    expected = domain.distance_matrix() @ post.probs
    best = np.flatnonzero(expected == expected.min())
    ids = np.array(domain.ids)
    winner = best[np.argmin(ids[best])]
    return int(ids[winner]), float(expected[winner])


def exp_er(matrix: ObfuscationMatrix, prior: PriorDistribution, x_prime: int) -> float:
    """Conditional expected inference error for one pseudo-location."""
    return optimal_attack(posterior(matrix, prior, x_prime), matrix.domain)[1]


def expected_error(
    matrix: ObfuscationMatrix, prior: PriorDistribution, domain: LocationDomain
) -> float:
    """Unconditional expected inference error.

    Computed directly as sum over x' of min over guesses of
    sum_x pi(x) f(x'|x) d(guess, x), which equals the evidence-weighted
    average of exp_er.
    """
    joint = _joint(matrix, prior)
    anchor_costs = domain.distance_matrix() @ joint  # [guess, x']
    return float(anchor_costs.min(axis=0).sum())


def quality_loss(
    matrix: ObfuscationMatrix, prior: PriorDistribution, domain: LocationDomain
) -> float:
    """Expected distance between true and reported locations."""
    return float((_joint(matrix, prior) * domain.distance_matrix()).sum())


def _normalized_set_posterior(
    members: Sequence[int],
    matrix: ObfuscationMatrix,
    prior: PriorDistribution,
    x_prime: int,
) -> tuple[np.ndarray, np.ndarray]:
    domain = matrix.domain
    j = domain.index_of(x_prime)
    idx = np.array([domain.index_of(m) for m in members])
    mass = prior.probs[idx] * matrix.probs[idx, j]
    total = mass.sum()
    if total <= 0.0:
        raise ValueError(f"set has zero posterior mass at {x_prime}")
    return idx, mass / total


def dop_er(
    members: Sequence[int],
    matrix: ObfuscationMatrix,
    prior: PriorDistribution,
    x_prime: int,
) -> float:
    """Set-normalized posterior error, guess anywhere in the domain."""
    idx, weights = _normalized_set_posterior(members, matrix, prior, x_prime)
    dm = matrix.domain.distance_matrix()
    return float((dm[:, idx] @ weights).min())


def piv_er(
    members: Sequence[int],
    matrix: ObfuscationMatrix,
    prior: PriorDistribution,
    x_prime: int,
) -> float:
    """Set-normalized posterior error, guess restricted to the set."""
    idx, weights = _normalized_set_posterior(members, matrix, prior, x_prime)
    dm = matrix.domain.distance_matrix()
    return float((dm[np.ix_(idx, idx)] @ weights).min())


def violation_mass(
    matrix: ObfuscationMatrix,
    prior: PriorDistribution,
    domain: LocationDomain,
    pls_map: dict[int, Sequence[int]],
) -> float:
    """Joint mass of (x, x') pairs where dop_er(S_x, x') > exp_er(x').

    pls_map gives each location's own protection set.  Strict inequality is
    taken with a 1e-12 absolute slack so exact ties never count.
    """
    joint = _joint(matrix, prior)
    dm = domain.distance_matrix()
    evidence = joint.sum(axis=0)
    exp_er_all = (dm @ joint).min(axis=0) / evidence
    mass = 0.0
    for i, loc_id in enumerate(domain.ids):
        idx = np.array([domain.index_of(m) for m in pls_map[loc_id]])
        sub = joint[idx]  # member mass per column
        set_mass = sub.sum(axis=0)
        # a zero-mass column carries no joint mass for this x either (x is a
        # member), so it can never contribute to the violation mass
        live = set_mass > 0.0
        weights = sub[:, live] / set_mass[live]
        dop_live = (dm[:, idx] @ weights).min(axis=0)
        violated = dop_live > exp_er_all[live] + _STRICT_TOL
        mass += float(joint[i, live][violated].sum())
    return mass


METRICS_CSV_COLUMNS = (
    "scheme",
    "epsilon",
    "E_m",
    "ExpErr",
    "QLoss",
    "min_ExpEr_xprime",
    "violation_mass",
)


def write_metrics_csv(reports, path, e_m: float | None = None) -> None:
    """One CSV row per MetricsReport, in the order given."""
    from pathlib import Path

    lines = [",".join(METRICS_CSV_COLUMNS)]
    for report in reports:
        mass = "" if report.violation_mass is None else f"{report.violation_mass:.12g}"
        lines.append(
            ",".join(
                [
                    report.scheme,
                    f"{report.epsilon:.12g}",
                    "" if e_m is None else f"{e_m:.12g}",
                    f"{report.expected_error:.12g}",
                    f"{report.quality_loss:.12g}",
                    f"{report.min_exp_er:.12g}",
                    mass,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def metrics_report(
    matrix: ObfuscationMatrix,
    prior: PriorDistribution,
    domain: LocationDomain,
    pls_map: dict[int, Sequence[int]] | None = None,
) -> MetricsReport:
    """Assemble all metrics for one matrix in one pass."""
    joint = _joint(matrix, prior)
    dm = domain.distance_matrix()
    evidence = joint.sum(axis=0)
    exp_er_all = (dm @ joint).min(axis=0) / evidence

    dop = piv = None
    mass = None
    if pls_map is not None:
        n = len(domain)
        dop = np.empty((n, n))
        piv = np.empty((n, n))
        for i, loc_id in enumerate(domain.ids):
            idx = np.array([domain.index_of(m) for m in pls_map[loc_id]])
            sub = joint[idx]
            weights = sub / sub.sum(axis=0, keepdims=True)
            dop[i] = (dm[:, idx] @ weights).min(axis=0)
            piv[i] = (dm[np.ix_(idx, idx)] @ weights).min(axis=0)
        mass = violation_mass(matrix, prior, domain, pls_map)

    return MetricsReport(
        scheme=matrix.scheme,
        epsilon=matrix.epsilon,
        exp_er=exp_er_all,
        expected_error=expected_error(matrix, prior, domain),
        quality_loss=quality_loss(matrix, prior, domain),
        violation_mass=mass,
        dop_er=dop,
        piv_er=piv,
    )
