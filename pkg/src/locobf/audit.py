"""Brute-force privacy audits: certify or refute ratio bounds by enumeration.

Every check enumerates all (x, y, x') triples in its scope and compares the
reporting-probability ratio f(x'|x) / f(x'|y) against a claimed bound; no
sampling is involved, so a PASS is a certificate at the stated tolerance and
a FAIL always carries concrete witnesses.  Ratios are computed in log space;
comparisons use a 1e-9 relative slack.  Zero entries are handled exactly:
0/0 counts as satisfying any bound, positive/0 is an infinite-ratio
violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import LocationDomain, PriorDistribution
from .mechanisms import ObfuscationMatrix
from .pls import DomainPartition, SearchParams, pive_search

REL_TOL = 1e-9
_LOG_SLACK = math.log1p(REL_TOL)
WITNESS_CAP = 100


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one exhaustive ratio check.

    For plain ratio checks, max_ratio is the largest f(x'|x)/f(x'|y) in
    scope and bound is the claimed constant.  For geo-indistinguishability,
    the distance-dependent factor exp(eps_g * d(x, y)) is divided out of
    each triple first, so max_ratio is the worst deviation factor and the
    bound is exp(eps_g * theta); min_theta is the smallest deviation that
    would still pass.  Witnesses list up to 100 violating triples as
    (x_id, y_id, x_prime_id, raw_ratio).
    """

    scope: str
    check: str
    bound: float
    max_ratio: float
    passed: bool
    witnesses: tuple[tuple[int, int, int, float], ...] = ()
    min_theta: float | None = None

    def __post_init__(self):
        # pass <=> max_ratio <= bound * (1 + REL_TOL); allow a hair of float
        # forgiveness so a 1-ulp exp/log round-trip cannot trip the check
        lhs = math.log(self.max_ratio) if self.max_ratio > 0 else -math.inf
        rhs = math.log(self.bound) + _LOG_SLACK
        if self.passed != (lhs <= rhs) and abs(lhs - rhs) > 1e-12:
            raise ValueError("pass flag inconsistent with max_ratio vs bound")
        if self.passed != (len(self.witnesses) == 0):
            raise ValueError("witnesses must be non-empty exactly when failing")

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "check": self.check,
            "bound": self.bound,
            "max_ratio": self.max_ratio,
            "passed": self.passed,
            "min_theta": self.min_theta,
            "witnesses": [
                {"x": x, "y": y, "x_prime": xp, "ratio": r}
                for x, y, xp, r in self.witnesses
            ],
        }


def ratio(matrix: ObfuscationMatrix, x: int, y: int, x_prime: int) -> float:
    """Direct re-evaluation of one ratio, for witness soundness checks."""
    j = matrix.domain.index_of(x_prime)
    num = matrix.probs[matrix.domain.index_of(x), j]
    den = matrix.probs[matrix.domain.index_of(y), j]
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return float(num / den)


def _log_probs(matrix: ObfuscationMatrix) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(matrix.probs)


def _scan_pairs(
    matrix: ObfuscationMatrix,
    pairs: Sequence[tuple[int, int]],
    log_bound_for_pair,
):
    """Worst log-excess over all (x, y, x') with per-pair log bounds.

    Returns (max_excess, max_log_ratio, witnesses).  The excess of a triple
    is its log ratio minus its pair's log bound; a positive excess beyond
    the slack is a violation.
    """
    domain = matrix.domain
    logp = _log_probs(matrix)
    ids = np.array(domain.ids)
    max_excess = -math.inf
    max_log_ratio = -math.inf
    witnesses: list[tuple[int, int, int, float]] = []
    for x_id, y_id in pairs:
        xi, yi = domain.index_of(x_id), domain.index_of(y_id)
        num, den = logp[xi], logp[yi]
        with np.errstate(invalid="ignore"):
            log_ratio = num - den
        both_zero = np.isneginf(num) & np.isneginf(den)
        log_ratio[both_zero] = 0.0  # 0/0 satisfies every bound
        log_bound = log_bound_for_pair(x_id, y_id)
        excess = log_ratio - log_bound
        worst = float(excess.max())
        max_excess = max(max_excess, worst)
        max_log_ratio = max(max_log_ratio, float(log_ratio.max()))
        if worst > _LOG_SLACK and len(witnesses) < WITNESS_CAP:
            for j in np.flatnonzero(excess > _LOG_SLACK):
                if len(witnesses) >= WITNESS_CAP:
                    break
                witnesses.append(
                    (x_id, y_id, int(ids[j]), float(np.exp(log_ratio[j])))
                )
    return max_excess, max_log_ratio, witnesses


def _ordered_pairs(members: Sequence[int]) -> list[tuple[int, int]]:
    return [(x, y) for x in members for y in members if x != y]


def check_dp_on_set(
    matrix: ObfuscationMatrix,
    members: Sequence[int],
    epsilon: float,
    scope: str | None = None,
) -> AuditReport:
    """Exhaustive epsilon-DP check of the ratio bound over one member set."""
    members = list(members)
    if len(members) < 2:
        return AuditReport(
            scope=scope or f"set{members}",
            check="dp",
            bound=math.exp(epsilon),
            max_ratio=1.0,
            passed=True,
        )
    max_excess, max_log_ratio, witnesses = _scan_pairs(
        matrix, _ordered_pairs(members), lambda x, y: epsilon
    )
    return AuditReport(
        scope=scope or f"set{members}",
        check="dp",
        bound=math.exp(epsilon),
        max_ratio=math.exp(max_log_ratio),
        passed=max_excess <= _LOG_SLACK,
        witnesses=tuple(witnesses),
    )


def check_geo_indist(
    matrix: ObfuscationMatrix,
    members: Sequence[int],
    epsilon_g: float,
    theta: float,
    scope: str | None = None,
) -> AuditReport:
    """Check f(x'|x)/f(x'|y) <= exp(eps_g * (d(x,y) + theta)) over one set.

    Also reports the minimal deviation theta that would pass, derived from
    the exhaustively computed worst log-ratio excess over eps_g * d(x, y).
    """
    members = list(members)
    domain = matrix.domain
    dm = domain.distance_matrix()
    if len(members) < 2:
        return AuditReport(
            scope=scope or f"set{members}",
            check="geo",
            bound=math.exp(epsilon_g * theta),
            max_ratio=1.0,
            passed=True,
            min_theta=0.0,
        )

    def pair_log_bound(x_id: int, y_id: int) -> float:
        # only the distance part; theta is compared via the excess
        return epsilon_g * dm[domain.index_of(x_id), domain.index_of(y_id)]

    max_excess, _, _ = _scan_pairs(matrix, _ordered_pairs(members), pair_log_bound)
    # rebuild witnesses against the theta-inclusive bound
    full_excess, _, witnesses = _scan_pairs(
        matrix,
        _ordered_pairs(members),
        lambda x, y: pair_log_bound(x, y) + epsilon_g * theta,
    )
    return AuditReport(
        scope=scope or f"set{members}",
        check="geo",
        bound=math.exp(epsilon_g * theta),
        max_ratio=math.exp(max_excess),
        passed=full_excess <= _LOG_SLACK,
        witnesses=tuple(witnesses),
        min_theta=max(0.0, max_excess / epsilon_g),
    )


def check_cross_pls(
    matrix: ObfuscationMatrix,
    partition: DomainPartition | None,
    epsilon: float,
) -> list[AuditReport]:
    """Cross-set and whole-domain ratio bounds.

    With a partition (personalized matrix): for every ordered group pair
    (i, j) check the bound exp(eps_i/2 * D(X)/D_i + eps_j/2 * D(X)/D_j),
    then check the whole domain against exp(epsilon * D(X)/D_min).  Without
    a partition (uniform matrix): check the whole domain against
    exp(epsilon * D(X)/D_max) with D_max the shared row sensitivity.
    Singleton groups have zero diameter and no cross bound; they are skipped
    pairwise and excluded from D_min.
    """
    domain = matrix.domain
    d_x = domain.diameter()
    reports: list[AuditReport] = []

    if partition is None:
        sens = matrix.sensitivities
        if not np.all(sens == sens[0]):
            raise ValueError("uniform cross check needs one shared sensitivity")
        d_shared = float(sens[0])
        bound = epsilon * d_x / d_shared if d_shared > 0 else 0.0
        max_excess, max_log_ratio, witnesses = _scan_pairs(
            matrix, _ordered_pairs(list(domain.ids)), lambda x, y: bound
        )
        reports.append(
            AuditReport(
                scope="domain",
                check="cross",
                bound=math.exp(bound),
                max_ratio=math.exp(max_log_ratio),
                passed=max_excess <= _LOG_SLACK,
                witnesses=tuple(witnesses),
            )
        )
        return reports

    groups = partition.groups
    group_eps = [
        float(matrix.row_epsilons[domain.index_of(g.members[0])]) for g in groups
    ]
    for i, gi in enumerate(groups):
        for j, gj in enumerate(groups):
            if i == j or gi.diameter_km == 0 or gj.diameter_km == 0:
                continue
            log_bound = 0.5 * d_x * (
                group_eps[i] / gi.diameter_km + group_eps[j] / gj.diameter_km
            )
            pairs = [(x, y) for x in gi.members for y in gj.members]
            max_excess, max_log_ratio, witnesses = _scan_pairs(
                matrix, pairs, lambda x, y: log_bound
            )
            reports.append(
                AuditReport(
                    scope=f"groups({i},{j})",
                    check="cross",
                    bound=math.exp(log_bound),
                    max_ratio=math.exp(max_log_ratio),
                    passed=max_excess <= _LOG_SLACK,
                    witnesses=tuple(witnesses),
                )
            )

    diameters = [g.diameter_km for g in groups if g.diameter_km > 0]
    if diameters:
        d_min = min(diameters)
        log_bound = epsilon * d_x / d_min
        max_excess, max_log_ratio, witnesses = _scan_pairs(
            matrix, _ordered_pairs(list(domain.ids)), lambda x, y: log_bound
        )
        reports.append(
            AuditReport(
                scope="domain",
                check="cross",
                bound=math.exp(log_bound),
                max_ratio=math.exp(max_log_ratio),
                passed=max_excess <= _LOG_SLACK,
                witnesses=tuple(witnesses),
            )
        )
    return reports


def find_observation1(
    domain: LocationDomain,
    prior: PriorDistribution,
    params: SearchParams,
) -> list[tuple[int, int, float, float]]:
    """All (x, y, D(S_x), D(S_y)) with y in x's set but the sets differing."""
    sets = {loc_id: pive_search(loc_id, params, domain, prior) for loc_id in domain.ids}
    out = []
    for x_id in domain.ids:
        sx = sets[x_id]
        for y_id in sx.members:
            if y_id == x_id:
                continue
            sy = sets[y_id]
            if sx.members != sy.members:
                out.append((x_id, y_id, sx.diameter_km, sy.diameter_km))
    return out


def circle_sets(domain: LocationDomain, diameter_km: float) -> list[tuple[int, ...]]:
    """Member sets of circles of the given diameter centered at each location.

    A finite stand-in for "every circular region of this diameter": only
    circles centered on occupied cells are enumerated.  Duplicates are
    dropped; sets are ordered by rank.
    """
    dm = domain.distance_matrix()
    ids = np.array(domain.ids)
    radius = diameter_km / 2.0
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    for i in range(len(domain)):
        members = tuple(int(v) for v in ids[dm[i] <= radius + 1e-12])
        if members not in seen:
            seen.add(members)
            out.append(members)
    return out
