"""Variance plug-ins, the sparse inverse proxy, and its error bounds."""

import math

import numpy as np
import pytest

import oracles
from pairrank.data import ComparisonData
from pairrank.errors import DataValidationError, ZeroDiagonalError
from pairrank.estimator import FitConfig, JacobianView, MomentSystem, fit, jacobian
from pairrank.graph import linear_merits, make_rng, sample_er_graph, sample_outcomes
from pairrank.inference import (
    CovarianceReport,
    Interval,
    approx_inverse,
    approx_inverse_error_bound,
    approx_inverse_error_bound_fixed,
    confidence_interval,
    covariance_exact,
    covariance_report,
    pair_variance,
    z_statistic,
)
from pairrank.links import derivative_bounds, logistic_link, probit_link


def fitted_report(seed=5, n_plus_1=8, link=None):
    link = link or probit_link()
    rng = make_rng(seed)
    t, a, _ = oracles.random_instance(rng, n_plus_1, max_count=4)
    system = MomentSystem(ComparisonData(t=t, a=a), link)
    result = fit(system, FitConfig(tolerance=1e-12))
    return system, covariance_report(system, result.merits)


def test_approx_inverse_matches_its_formula():
    system, report = fitted_report()
    view = report.jacobian
    s = approx_inverse(view)
    diag = np.diag(view.matrix)
    for i in range(diag.size):
        for j in range(diag.size):
            expected = 1.0 / view.baseline_diag + (1.0 / diag[i] if i == j else 0.0)
            assert s[i, j] == pytest.approx(expected, rel=1e-14)


def test_approx_inverse_rejects_nonpositive_diagonal():
    matrix = np.array([[0.0, -0.1], [-0.1, 0.5]])
    view = JacobianView(
        matrix=matrix,
        baseline_row=np.array([-0.2, -0.2]),
        baseline_diag=0.4,
        free_index=np.array([1, 2]),
        baseline=0,
    )
    with pytest.raises(ZeroDiagonalError):
        approx_inverse(view)


def test_logistic_score_variance_equals_jacobian_diagonal():
    """For the logistic link F' = F (1 - F), so U and V share diagonals."""
    system, report = fitted_report(seed=9, link=logistic_link())
    view = report.jacobian
    np.testing.assert_allclose(
        report.score_variance[view.free_index], np.diag(view.matrix), rtol=1e-12
    )
    assert report.score_variance[view.baseline] == pytest.approx(
        view.baseline_diag, rel=1e-12
    )


def test_conditional_variance_against_direct_sum():
    system, report = fitted_report(seed=3)
    merits = report.merits
    t = system.data.t
    cdf = oracles.normal_cdf
    for i in range(merits.size):
        expected = sum(
            t[i, j] * cdf(merits[i] - merits[j]) * (1.0 - cdf(merits[i] - merits[j]))
            for j in range(merits.size)
        )
        assert report.score_variance[i] == pytest.approx(expected, rel=1e-9)


def test_baseline_variance_doubles_its_own_ratio():
    _, report = fitted_report()
    b = report.baseline
    ratio_b = report.score_variance[b] / report.jacobian.baseline_diag**2
    assert report.variance_diag[b] == pytest.approx(2.0 * ratio_b, rel=1e-13)
    assert report.se[b] == pytest.approx(math.sqrt(2.0 * ratio_b), rel=1e-13)


def test_variance_diag_and_covariance_matrix_agree():
    _, report = fitted_report(seed=11)
    free = report.jacobian.free_index
    sigma = report.covariance_matrix
    np.testing.assert_allclose(np.diag(sigma), report.variance_diag[free], rtol=1e-13)
    off = sigma[0, 1]
    assert np.allclose(sigma - np.diag(np.diag(sigma) - off), off)


def test_pair_variance_symmetry_and_consistency():
    _, report = fitted_report(seed=11)
    free = report.jacobian.free_index
    i, j = int(free[0]), int(free[1])
    assert pair_variance(report, i, j) == pair_variance(report, j, i)
    sigma = report.covariance_matrix
    assert pair_variance(report, i, j) == pytest.approx(
        sigma[0, 0] + sigma[1, 1] - 2.0 * sigma[0, 1], rel=1e-12
    )
    b = report.baseline
    assert pair_variance(report, i, b) == pytest.approx(
        report.variance_diag[i], rel=1e-13
    )


def test_pair_variance_needs_distinct_subjects():
    _, report = fitted_report()
    with pytest.raises(DataValidationError, match="distinct"):
        pair_variance(report, 1, 1)


def manufactured_report(score_variance):
    matrix = np.array([[0.5, -0.1], [-0.1, 0.4]])
    view = JacobianView(
        matrix=matrix,
        baseline_row=np.array([-0.4, -0.3]),
        baseline_diag=0.7,
        free_index=np.array([1, 2]),
        baseline=0,
    )
    return CovarianceReport(
        merits=np.array([0.0, 0.3, -0.2]),
        jacobian=view,
        score_variance=np.asarray(score_variance, dtype=float),
    )


def test_confidence_interval_validation_and_degenerate_branch():
    _, report = fitted_report()
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(DataValidationError, match="level"):
            confidence_interval(report, 1, 2, level=bad)
    degenerate = manufactured_report([0.0, 0.0, 0.0])
    got = confidence_interval(degenerate, 1, 2, level=0.9)
    assert not got.valid
    assert got.width == 0.0
    assert got.lower == got.upper == pytest.approx(0.5)


def test_confidence_interval_width_scales_with_level():
    _, report = fitted_report(seed=21)
    narrow = confidence_interval(report, 1, 2, level=0.5)
    wide = confidence_interval(report, 1, 2, level=0.99)
    assert narrow.valid and wide.valid
    assert wide.width > narrow.width
    center = report.merits[1] - report.merits[2]
    assert narrow.covers(center) and wide.covers(center)
    # the 95% half-width is z * sqrt(pair variance) with z = Phi^-1(0.975)
    got = confidence_interval(report, 1, 2)
    half = 1.959963984540054 * math.sqrt(pair_variance(report, 1, 2))
    assert got.width == pytest.approx(2.0 * half, rel=1e-12)


def test_interval_covers_and_width():
    interval = Interval(lower=-1.0, upper=3.0, level=0.95, valid=True)
    assert interval.width == 4.0
    assert interval.covers(0.0) and interval.covers(-1.0) and interval.covers(3.0)
    assert not interval.covers(3.0001)


def test_z_statistic_arithmetic():
    _, report = fitted_report(seed=21)
    estimate = report.merits[2] - report.merits[4]
    sd = math.sqrt(pair_variance(report, 2, 4))
    assert z_statistic(report, 2, 4, 0.0) == pytest.approx(estimate / sd, rel=1e-12)
    assert z_statistic(report, 2, 4, estimate) == pytest.approx(0.0, abs=1e-12)
    shifted = z_statistic(report, 2, 4, estimate - sd)
    assert shifted == pytest.approx(1.0, rel=1e-12)


def test_exact_sandwich_is_symmetric_and_near_the_proxy():
    system, report = fitted_report(seed=2, n_plus_1=12)
    sigma_exact = covariance_exact(report, system.data, system.link)
    np.testing.assert_allclose(sigma_exact, sigma_exact.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(sigma_exact) > 0.0)
    sigma_proxy = report.covariance_matrix
    scale = np.abs(sigma_exact).max()
    assert np.abs(sigma_exact - sigma_proxy).max() < 0.5 * scale


def test_error_bound_formulas_and_validation():
    bounds = derivative_bounds(probit_link(), radius=1.0)
    got = approx_inverse_error_bound(10, 3, 0.5, bounds)
    expected = 12.0 * 3 * bounds.slope_max**2 / (bounds.slope_min**3 * 10 * 9 * 0.125)
    assert got == pytest.approx(expected, rel=1e-13)
    with pytest.raises(DataValidationError):
        approx_inverse_error_bound(1, 3, 0.5, bounds)
    with pytest.raises(DataValidationError):
        approx_inverse_error_bound(10, 3, 0.0, bounds)

    fixed = approx_inverse_error_bound_fixed(10, 2, 0.3, 0.8, bounds)
    expected = 2.0 * 4 * bounds.slope_max**2 * 0.8 / (bounds.slope_min**3 * 0.027 * 100)
    assert fixed == pytest.approx(expected, rel=1e-13)
    with pytest.raises(DataValidationError):
        approx_inverse_error_bound_fixed(10, 2, 0.0, 0.8, bounds)
    with pytest.raises(DataValidationError):
        approx_inverse_error_bound_fixed(1, 2, 0.3, 0.8, bounds)


def test_error_bound_shrinks_with_size_and_grows_with_count():
    bounds = derivative_bounds(probit_link(), radius=1.0)
    sizes = [50, 100, 200, 400]
    values = [approx_inverse_error_bound(n, 1, 0.5, bounds) for n in sizes]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert approx_inverse_error_bound(100, 4, 0.5, bounds) == pytest.approx(
        4.0 * values[1], rel=1e-13
    )


def test_random_design_bound_holds_on_a_sampled_instance():
    """One frozen draw: the exact inverse sits within the proxy's bound."""
    n_plus_1, p = 61, 0.6
    link = probit_link()
    merits = linear_merits(n_plus_1, 0.4)
    merits = merits - merits[n_plus_1 // 2]
    radius = float(np.abs(merits).max())
    rng = make_rng(20180906)
    t = sample_er_graph(n_plus_1, 1, p, rng)
    data = sample_outcomes(t, merits, link, rng)
    system = MomentSystem(data, link)
    view = jacobian(system, merits)
    exact = np.linalg.inv(view.matrix)
    error = np.abs(exact - approx_inverse(view)).max()
    bound = approx_inverse_error_bound(
        n_plus_1 - 1, 1, p, derivative_bounds(link, radius)
    )
    assert error <= bound
