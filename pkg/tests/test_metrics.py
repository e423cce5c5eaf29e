import math

import numpy as np
import pytest

from conftest import raw_matrix
from locobf.domain import LocationDomain, PriorDistribution
from locobf.mechanisms import build_pive_matrix, build_uniform_matrix, search_all
from locobf.metrics import (
    dop_er,
    exp_er,
    expected_error,
    metrics_report,
    optimal_attack,
    piv_er,
    posterior,
    quality_loss,
    violation_mass,
)
from locobf.pls import SearchParams, e_score


@pytest.fixture(scope="module")
def pive_setup(bundled):
    domain, prior = bundled
    params = SearchParams(epsilon=1.0, e_m=0.15, range=3)
    by_loc = search_all(domain, prior, params)
    matrix = build_pive_matrix(domain, prior, params, by_loc)
    pls_map = {i: by_loc[i].members for i in domain.ids}
    return domain, prior, matrix, pls_map


def three_cell_fixture():
    cells = [(1, 0, 0), (2, 1, 0), (3, 2, 0)]
    domain = LocationDomain(order=2, cell_size_km=1.0, cells=cells)
    prior = PriorDistribution([0.5, 0.25, 0.25])
    f = np.array([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.2, 0.7]])
    return domain, prior, raw_matrix(domain, f)


def test_posterior_identity_matrix(bundled):
    domain, prior = bundled
    matrix = raw_matrix(domain, np.eye(len(domain)))
    post = posterior(matrix, prior, 13)
    expect = np.zeros(len(domain))
    expect[domain.index_of(13)] = 1.0
    assert np.array_equal(post.probs, expect)


def test_posterior_uniform_rows_equal_prior(bundled):
    domain, prior = bundled
    n = len(domain)
    matrix = raw_matrix(domain, np.full((n, n), 1.0 / n))
    post = posterior(matrix, prior, 29)
    assert np.allclose(post.probs, prior.probs, rtol=0, atol=1e-15)


def test_posterior_matches_hand_bayes():
    domain, prior, matrix = three_cell_fixture()
    # joint at column 1: (0.5*0.6, 0.25*0.2, 0.25*0.1) = (0.3, 0.05, 0.025)
    # evidence 0.375 -> posterior (0.8, 2/15, 1/15)
    post = posterior(matrix, prior, 1)
    assert np.allclose(post.probs, [0.8, 2 / 15, 1 / 15], rtol=0, atol=1e-15)
    # column 3: (0.05, 0.075, 0.175), evidence 0.3 -> (1/6, 1/4, 7/12)
    post3 = posterior(matrix, prior, 3)
    assert np.allclose(post3.probs, [1 / 6, 1 / 4, 7 / 12], rtol=0, atol=1e-15)


def test_posterior_rows_normalize(pive_setup):
    domain, prior, matrix, _ = pive_setup
    for x_prime in domain.ids:
        post = posterior(matrix, prior, x_prime)
        assert abs(post.probs.sum() - 1.0) <= 1e-12


def test_optimal_attack_point_mass(bundled):
    domain, prior = bundled
    matrix = raw_matrix(domain, np.eye(len(domain)))
    guess, err = optimal_attack(posterior(matrix, prior, 31), domain)
    assert guess == 31 and err == 0.0


def test_optimal_attack_two_mass_tie(strip, uniform_prior):
    # equal masses on cells 2 km apart: every anchor between them scores
    # exactly 1.0, so the smallest-id tie break picks the left mass itself
    prior = uniform_prior(strip)
    n = len(strip)
    probs = np.zeros(n)
    probs[strip.index_of(3)] = 0.5
    probs[strip.index_of(5)] = 0.5
    from locobf.metrics import PosteriorRow

    post = PosteriorRow(x_prime=3, probs=probs)
    guess, err = optimal_attack(post, strip)
    # oracle: exhaustive scan over all strip anchors
    dm = strip.distance_matrix()
    values = dm @ probs
    assert err == pytest.approx(values.min()) == pytest.approx(1.0)
    winners = [strip.ids[i] for i in np.flatnonzero(values == values.min())]
    assert winners == [3, 4, 5]
    assert guess == 3


def test_optimal_attack_prior_posterior_matches_scan(pive_setup):
    domain, prior, matrix, _ = pive_setup
    n = len(domain)
    matrix_uniform = raw_matrix(domain, np.full((n, n), 1.0 / n))
    guess, err = optimal_attack(posterior(matrix_uniform, prior, 8), domain)
    dm = domain.distance_matrix()
    values = dm @ prior.probs
    assert err == pytest.approx(float(values.min()), abs=1e-12)
    best_ids = [domain.ids[i] for i in np.flatnonzero(values == values.min())]
    assert guess == min(best_ids)


def test_expected_error_identity_is_zero(bundled):
    domain, prior = bundled
    matrix = raw_matrix(domain, np.eye(len(domain)))
    assert expected_error(matrix, prior, domain) == 0.0


def test_expected_error_singleton_domain():
    domain = LocationDomain(order=1, cell_size_km=1.0, cells=[(1, 0, 0)])
    prior = PriorDistribution([1.0])
    matrix = raw_matrix(domain, np.array([[1.0]]))
    assert expected_error(matrix, prior, domain) == 0.0
    assert quality_loss(matrix, prior, domain) == 0.0


def test_expected_error_consistency_identity(pive_setup):
    domain, prior, matrix, _ = pive_setup
    # second, independent evaluation order: per-column posterior errors
    # weighted by evidence
    evidence = (prior.probs[:, None] * matrix.probs).sum(axis=0)
    total = sum(
        evidence[domain.index_of(xp)] * exp_er(matrix, prior, xp)
        for xp in domain.ids
    )
    assert expected_error(matrix, prior, domain) == pytest.approx(total, abs=1e-9)


def test_quality_loss_examples(bundled):
    domain, prior = bundled
    matrix = raw_matrix(domain, np.eye(len(domain)))
    assert quality_loss(matrix, prior, domain) == 0.0

    two = LocationDomain(order=1, cell_size_km=1.0, cells=[(1, 0, 0), (2, 1, 0)])
    prior2 = PriorDistribution([0.5, 0.5])
    uniform_rows = raw_matrix(two, np.full((2, 2), 0.5))
    assert quality_loss(uniform_rows, prior2, two) == pytest.approx(0.5, abs=1e-15)


def test_quality_loss_nonnegative(pive_setup):
    domain, prior, matrix, _ = pive_setup
    assert quality_loss(matrix, prior, domain) >= 0.0


def test_dop_piv_singleton_are_zero(pive_setup):
    domain, prior, matrix, _ = pive_setup
    assert dop_er([9], matrix, prior, 40) == 0.0
    assert piv_er([9], matrix, prior, 40) == 0.0


def test_dop_on_whole_domain_equals_exp_er(pive_setup):
    domain, prior, matrix, _ = pive_setup
    members = list(domain.ids)
    for xp in (1, 17, 50):
        assert dop_er(members, matrix, prior, xp) == pytest.approx(
            exp_er(matrix, prior, xp), abs=1e-12
        )


def test_piv_at_least_dop_on_random_draws(pive_setup):
    domain, prior, matrix, _ = pive_setup
    rng = np.random.default_rng(5)
    ids = list(domain.ids)
    for _ in range(100):
        size = int(rng.integers(1, 8))
        members = list(rng.choice(ids, size=size, replace=False))
        xp = int(rng.choice(ids))
        assert piv_er(members, matrix, prior, xp) >= dop_er(
            members, matrix, prior, xp
        ) - 1e-12


def test_piv_er_lower_bound_under_set_dp(bundled):
    # once the ratio bound holds on a set, the set-restricted error is at
    # least exp(-eps) times the prior-only score of the set
    domain, prior = bundled
    params = SearchParams(epsilon=1.0, e_m=0.15, range=3)
    by_loc = search_all(domain, prior, params)
    uniform = build_uniform_matrix(domain, prior, params, by_loc)
    floor_scale = math.exp(-params.epsilon)
    for loc_id in (1, 5, 6, 24, 50):
        members = by_loc[loc_id].members
        floor = floor_scale * e_score(members, prior, domain)
        for xp in domain.ids:
            assert piv_er(members, uniform, prior, xp) >= floor - 1e-9


def test_violation_mass_identity_singletons(bundled):
    domain, prior = bundled
    matrix = raw_matrix(domain, np.eye(len(domain)))
    pls_map = {i: (i,) for i in domain.ids}
    assert violation_mass(matrix, prior, domain, pls_map) == 0.0


def test_violation_mass_positive_on_bundled(pive_setup):
    domain, prior, matrix, pls_map = pive_setup
    mass = violation_mass(matrix, prior, domain, pls_map)
    assert 0.0 < mass < 1.0


def test_metrics_report_bundles_everything(pive_setup):
    domain, prior, matrix, pls_map = pive_setup
    report = metrics_report(matrix, prior, domain, pls_map)
    n = len(domain)
    assert report.exp_er.shape == (n,)
    assert report.dop_er.shape == (n, n)
    assert report.piv_er.shape == (n, n)
    assert report.min_exp_er == pytest.approx(float(report.exp_er.min()))
    assert report.violation_mass == pytest.approx(
        violation_mass(matrix, prior, domain, pls_map)
    )
    assert np.all(report.piv_er >= report.dop_er - 1e-12)
    # spot-check the tables against the scalar entry points
    assert report.dop_er[domain.index_of(5), domain.index_of(9)] == pytest.approx(
        dop_er(pls_map[5], matrix, prior, 9)
    )
    assert report.piv_er[domain.index_of(5), domain.index_of(9)] == pytest.approx(
        piv_er(pls_map[5], matrix, prior, 9)
    )
    lean = metrics_report(matrix, prior, domain)
    assert lean.violation_mass is None and lean.dop_er is None


def test_write_metrics_csv(pive_setup, tmp_path):
    from locobf.metrics import METRICS_CSV_COLUMNS, write_metrics_csv

    domain, prior, matrix, pls_map = pive_setup
    report = metrics_report(matrix, prior, domain, pls_map)
    path = tmp_path / "metrics.csv"
    write_metrics_csv([report], path, e_m=0.15)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(METRICS_CSV_COLUMNS)
    cells = lines[1].split(",")
    assert cells[0] == "pive"
    assert float(cells[3]) == pytest.approx(report.expected_error, rel=1e-10)
    assert float(cells[6]) > 0
