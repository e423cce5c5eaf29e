import math

import numpy as np
import pytest

from conftest import raw_matrix
from locobf.audit import (
    check_cross_pls,
    check_dp_on_set,
    check_geo_indist,
    circle_sets,
    find_observation1,
    ratio,
)
from locobf.domain import LocationDomain, PriorDistribution
from locobf.mechanisms import (
    SchemeConfig,
    build_personalized_matrix,
    build_pive_matrix,
    build_uniform_matrix,
    search_all,
)
from locobf.pls import DomainPartition, SearchParams, make_pls, partition_domain


@pytest.fixture(scope="module")
def fitted(bundled):
    domain, prior = bundled
    params = SearchParams(epsilon=1.0, e_m=0.15, range=3)
    by_loc = search_all(domain, prior, params)
    partition = partition_domain(params, domain, prior)
    return {
        "domain": domain,
        "prior": prior,
        "params": params,
        "by_loc": by_loc,
        "partition": partition,
        "pive": build_pive_matrix(domain, prior, params, by_loc),
        "uniform": build_uniform_matrix(domain, prior, params, by_loc),
        "personalized": build_personalized_matrix(
            domain, prior, partition, SchemeConfig("personalized", params)
        ),
    }


def test_uniform_rows_pass_any_epsilon(bundled):
    domain, prior = bundled
    n = len(domain)
    matrix = raw_matrix(domain, np.full((n, n), 1.0 / n))
    report = check_dp_on_set(matrix, list(domain.ids), epsilon=0.0)
    assert report.passed and report.max_ratio == pytest.approx(1.0)
    assert report.witnesses == ()


def test_pive_fails_on_witness_set(fitted):
    report = check_dp_on_set(fitted["pive"], (5, 6), epsilon=1.0, scope="pls5")
    assert not report.passed
    assert report.max_ratio > math.e
    assert report.witnesses
    x, y, xp, r = report.witnesses[0]
    assert {x, y} == {5, 6}
    assert r > math.e


def test_uniform_passes_every_set(fitted):
    for loc_id, pls in fitted["by_loc"].items():
        report = check_dp_on_set(fitted["uniform"], pls.members, 1.0)
        assert report.passed, loc_id


def test_personalized_passes_every_group(fitted):
    for group in fitted["partition"].groups:
        assert check_dp_on_set(fitted["personalized"], group.members, 1.0).passed


def test_witnesses_reproduce_their_ratio(fitted):
    report = check_dp_on_set(fitted["pive"], (5, 6), epsilon=1.0)
    for x, y, xp, r in report.witnesses:
        assert ratio(fitted["pive"], x, y, xp) == pytest.approx(r, rel=1e-9)


def test_geo_uniform_certificate(fitted):
    matrix = fitted["uniform"]
    d_max = float(matrix.sensitivities[0])
    eps_g = 1.0 / (2.0 * d_max)
    for pls in fitted["by_loc"].values():
        report = check_geo_indist(matrix, pls.members, eps_g, theta=d_max)
        assert report.passed
        assert report.min_theta <= d_max + 1e-9


def test_geo_personalized_certificate(fitted):
    matrix = fitted["personalized"]
    for group in fitted["partition"].groups:
        eps_g = 1.0 / (2.0 * group.diameter_km)
        report = check_geo_indist(matrix, group.members, eps_g, theta=group.diameter_km)
        assert report.passed


def test_geo_zero_theta_on_flat_rows(bundled):
    domain, prior = bundled
    n = len(domain)
    matrix = raw_matrix(domain, np.full((n, n), 1.0 / n))
    report = check_geo_indist(matrix, list(domain.ids), epsilon_g=0.3, theta=0.0)
    assert report.passed
    assert report.min_theta == 0.0


def test_geo_min_theta_is_tight(fitted):
    matrix = fitted["uniform"]
    members = fitted["by_loc"][5].members
    eps_g = 1.0 / (2.0 * float(matrix.sensitivities[0]))
    report = check_geo_indist(matrix, members, eps_g, theta=10.0)
    tight = report.min_theta
    assert check_geo_indist(matrix, members, eps_g, theta=tight + 1e-9).passed
    if tight > 1e-6:
        assert not check_geo_indist(
            matrix, members, eps_g, theta=tight * 0.9
        ).passed


def test_cross_single_group_reduces_to_dp(fitted):
    domain, prior = fitted["domain"], fitted["prior"]
    params = fitted["params"]
    whole = DomainPartition(groups=(make_pls(list(domain.ids), prior, domain),))
    matrix = build_personalized_matrix(
        domain, prior, whole, SchemeConfig("personalized", params)
    )
    reports = check_cross_pls(matrix, whole, params.epsilon)
    assert len(reports) == 1
    only = reports[0]
    assert only.scope == "domain"
    # D(group) == D(domain), so the bound collapses to exp(epsilon)
    assert only.bound == pytest.approx(math.exp(params.epsilon))
    direct = check_dp_on_set(matrix, list(domain.ids), params.epsilon)
    assert only.passed == direct.passed
    assert only.max_ratio == pytest.approx(direct.max_ratio, rel=1e-12)


def test_cross_bundled_personalized_passes(fitted):
    reports = check_cross_pls(fitted["personalized"], fitted["partition"], 1.0)
    assert all(r.passed for r in reports)
    scopes = {r.scope for r in reports}
    assert "domain" in scopes
    k = len(fitted["partition"].groups)
    assert len(reports) == k * (k - 1) + 1


def test_cross_uniform_global_bound(fitted):
    reports = check_cross_pls(fitted["uniform"], None, 1.0)
    assert len(reports) == 1
    report = reports[0]
    assert report.passed
    d_x = fitted["domain"].diameter()
    d_max = float(fitted["uniform"].sensitivities[0])
    assert report.bound == pytest.approx(math.exp(d_x / d_max))


def test_negative_control_flips_to_fail(fitted):
    domain = fitted["domain"]
    probs = fitted["uniform"].probs.copy()
    i = domain.index_of(5)
    # concentrate row 5 sharply; its neighbors keep flat rows
    probs[i] = 1e-9
    probs[i, domain.index_of(5)] = 0.0
    probs[i, domain.index_of(5)] = 1.0 - probs[i].sum()
    corrupted = raw_matrix(domain, probs, scheme="uniform")
    report = check_dp_on_set(corrupted, (5, 6), epsilon=1.0)
    assert not report.passed
    assert report.witnesses


def test_infinite_ratio_on_zero_entries():
    domain = LocationDomain(order=1, cell_size_km=1.0, cells=[(1, 0, 0), (2, 1, 0)])
    probs = np.array([[1.0, 0.0], [0.5, 0.5]])
    matrix = raw_matrix(domain, probs)
    report = check_dp_on_set(matrix, [1, 2], epsilon=5.0)
    assert not report.passed
    assert math.isinf(report.max_ratio)
    witnesses = {(x, y, xp): r for x, y, xp, r in report.witnesses}
    assert math.isinf(witnesses[(2, 1, 2)])


def test_zero_over_zero_satisfies():
    domain = LocationDomain(order=1, cell_size_km=1.0, cells=[(1, 0, 0), (2, 1, 0)])
    probs = np.array([[1.0, 0.0], [1.0, 0.0]])
    matrix = raw_matrix(domain, probs)
    report = check_dp_on_set(matrix, [1, 2], epsilon=0.1)
    assert report.passed


def test_find_observation1_bundled(fitted):
    witnesses = find_observation1(
        fitted["domain"], fitted["prior"], fitted["params"]
    )
    assert witnesses
    as_pairs = {(x, y): (dx, dy) for x, y, dx, dy in witnesses}
    assert (5, 6) in as_pairs
    dx, dy = as_pairs[(5, 6)]
    assert dx == pytest.approx(2.0) and dy == pytest.approx(1.0)
    for x, y, _, _ in witnesses:
        assert y in fitted["by_loc"][x].members and y != x


def test_find_observation1_symmetric_pair_empty():
    domain = LocationDomain(order=1, cell_size_km=1.0, cells=[(1, 0, 0), (2, 1, 0)])
    prior = PriorDistribution([0.5, 0.5])
    params = SearchParams(epsilon=1.0, e_m=0.15, range=1)
    assert find_observation1(domain, prior, params) == []


def test_circle_sets_pass_dp_for_uniform(fitted):
    domain = fitted["domain"]
    matrix = fitted["uniform"]
    d_max = float(matrix.sensitivities[0])
    sets = circle_sets(domain, d_max)
    assert sets
    for members in sets:
        assert check_dp_on_set(matrix, members, 1.0).passed
    # every circle of that diameter contains its center and is within range
    dm = domain.distance_matrix()
    for members in sets:
        idx = [domain.index_of(m) for m in members]
        assert float(dm[np.ix_(idx, idx)].max()) <= 2 * d_max + 1e-9


def test_witness_cap():
    rng = np.random.default_rng(0)
    n = 24
    cells = [(i + 1, i % 8, i // 8) for i in range(n)]
    domain = LocationDomain(order=3, cell_size_km=1.0, cells=cells)
    probs = rng.dirichlet(np.ones(n), size=n)
    matrix = raw_matrix(domain, probs)
    report = check_dp_on_set(matrix, list(domain.ids), epsilon=0.01)
    assert not report.passed
    assert len(report.witnesses) == 100
