"""Kernel contract: symmetric CDFs with positive densities and true inverses."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from oracles import central_difference
from pairrank.errors import LinkValidationError
from pairrank.links import (
    LinkModel,
    available_links,
    custom_link,
    derivative_bounds,
    get_link,
    logistic_link,
    probit_link,
    register_link,
    validate_link,
)

LINKS = [logistic_link(), probit_link()]


def test_registry_lists_stock_links():
    assert available_links() == ("logistic", "probit")
    assert get_link("probit").name == "probit"


def test_unknown_link_name_rejected():
    with pytest.raises(LinkValidationError, match="unknown link"):
        get_link("cloglog")


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
def test_cdf_symmetry(link):
    x = np.linspace(-20.0, 20.0, 1001)
    np.testing.assert_allclose(link.cdf(x) + link.cdf(-x), 1.0, rtol=0, atol=1e-12)


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
def test_quantile_inverts_cdf(link):
    x = np.linspace(-5.0, 5.0, 101)
    np.testing.assert_allclose(link.quantile(link.cdf(x)), x, atol=1e-8)


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
def test_pdf_is_cdf_derivative(link):
    x = np.linspace(-8.0, 8.0, 161)
    np.testing.assert_allclose(
        link.pdf(x), central_difference(link.cdf, x), atol=1e-9
    )


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
def test_pdf_deriv_is_pdf_derivative(link):
    x = np.linspace(-8.0, 8.0, 161)
    np.testing.assert_allclose(
        link.pdf_deriv(x), central_difference(link.pdf, x), atol=1e-9
    )


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
def test_density_integrates_to_one(link):
    mass, err = integrate.quad(lambda v: float(link.pdf(np.float64(v))), -40, 40)
    assert abs(mass - 1.0) < 1e-9 and err < 1e-9


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
@given(x=st.floats(min_value=-30, max_value=30), y=st.floats(min_value=-30, max_value=30))
def test_cdf_bounded_monotone_density_positive(link, x, y):
    fx, fy = float(link.cdf(np.float64(x))), float(link.cdf(np.float64(y)))
    assert 0.0 <= fx <= 1.0
    if x < y:
        assert fx <= fy
    assert float(link.pdf(np.float64(x))) > 0.0


@pytest.mark.parametrize("link", LINKS, ids=lambda l: l.name)
@pytest.mark.parametrize("radius", [0.5, 1.0, 2.5])
def test_derivative_bounds_envelope_the_grid(link, radius):
    """The closed-form constants must actually bound pdf and |pdf'| on the interval."""
    bounds = derivative_bounds(link, radius)
    x = np.linspace(-2.0 * radius, 2.0 * radius, 20001)
    dens = np.asarray(link.pdf(x))
    curv = np.abs(np.asarray(link.pdf_deriv(x)))
    assert bounds.slope_min <= dens.min() + 1e-12
    assert dens.max() <= bounds.slope_max + 1e-12
    assert curv.max() <= bounds.curvature_max + 1e-12
    assert bounds.slope_min > 0.0


def test_derivative_bounds_negative_radius():
    with pytest.raises(ValueError):
        derivative_bounds(probit_link(), -1.0)


def test_probit_envelope_constants():
    bounds = derivative_bounds(probit_link(), 1.0)
    assert bounds.slope_max == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))
    assert bounds.curvature_max == pytest.approx(
        math.exp(-0.5) / math.sqrt(2.0 * math.pi)
    )
    assert bounds.slope_min == pytest.approx(math.exp(-2.0) / math.sqrt(2.0 * math.pi))


def test_validate_rejects_asymmetric_cdf():
    shifted = custom_link("shifted", lambda x: get_link("logistic").cdf(x - 1.0))
    with pytest.raises(LinkValidationError, match="F\\(x\\)\\+F\\(-x\\)=1"):
        validate_link(shifted)


def test_validate_rejects_vanishing_density():
    clipped = custom_link("clipped", lambda x: np.clip(x, -0.4, 0.4) + 0.5)
    with pytest.raises(LinkValidationError, match="strictly positive"):
        validate_link(clipped)


def test_validate_rejects_non_monotone_cdf():
    wavy = LinkModel(
        name="wavy",
        cdf=lambda x: 0.5 + 0.1 * np.sin(np.asarray(x, dtype=float)),
        pdf=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        pdf_deriv=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        quantile=lambda p: np.asarray(p, dtype=float),
    )
    with pytest.raises(LinkValidationError, match="strictly increasing"):
        validate_link(wavy)


def test_validate_rejects_nonfinite_cdf():
    broken = LinkModel(
        name="broken",
        cdf=lambda x: np.where(np.asarray(x, dtype=float) > 3.0, np.inf, 0.5),
        pdf=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        pdf_deriv=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        quantile=lambda p: np.asarray(p, dtype=float),
    )
    with pytest.raises(LinkValidationError, match="not finite"):
        validate_link(broken)


def test_custom_link_fills_and_registers():
    """A CDF alone is enough; derivatives and quantile get filled numerically."""
    cauchy = custom_link("cauchy", lambda x: 0.5 + np.arctan(np.asarray(x)) / math.pi)
    try:
        register_link(cauchy)
        assert "cauchy" in available_links()
        assert get_link("cauchy") is cauchy
        x = np.array([-2.0, -0.3, 0.0, 1.7])
        np.testing.assert_allclose(
            cauchy.pdf(x), 1.0 / (math.pi * (1.0 + x**2)), atol=1e-8
        )
        q = float(np.asarray(cauchy.quantile(np.float64(0.8))))
        assert float(cauchy.cdf(np.float64(q))) == pytest.approx(0.8, abs=1e-10)
    finally:
        from pairrank import links

        links._REGISTRY.pop("cauchy", None)


def test_numeric_quantile_rejects_bad_probability():
    cauchy = custom_link("cauchy2", lambda x: 0.5 + np.arctan(np.asarray(x)) / math.pi)
    with pytest.raises(LinkValidationError, match="quantile argument"):
        cauchy.quantile(np.float64(1.0))
