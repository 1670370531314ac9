"""Symmetric link kernels mapping merit differences to win probabilities.

A link is a smooth CDF F with F(x) + F(-x) = 1 and strictly positive density.
The two stock kernels are the logistic (Bradley-Terry) and the standard
normal (Thurstone) links. Custom kernels can be registered after passing the
same symmetry and monotonicity checks the stock ones satisfy by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import LinkValidationError

_SQRT_2PI = math.sqrt(2.0 * math.pi)

Kernel = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LinkModel:
    """Immutable bundle of a win-probability CDF and its derivatives.

    All four callables are vectorized over numpy arrays. ``pdf`` is the first
    derivative of ``cdf``, ``pdf_deriv`` the second, ``quantile`` the inverse.
    Instances are safe to share across threads.
    """

    name: str
    cdf: Kernel
    pdf: Kernel
    pdf_deriv: Kernel
    quantile: Kernel


@dataclass(frozen=True)
class DerivativeBounds:
    """Envelope constants for a link over differences |x| <= 2 * radius.

    slope_min is a positive lower bound on the density over the interval,
    slope_max an upper bound, curvature_max an upper bound on the magnitude
    of the density derivative. Used by the sparse-inverse error bound and
    the Newton convergence certificate.
    """

    slope_min: float
    slope_max: float
    curvature_max: float
    radius: float


def _logistic_pdf(x):
    p = special.expit(x)
    return p * special.expit(-x)


def _logistic_pdf_deriv(x):
    p = special.expit(x)
    return p * special.expit(-x) * (1.0 - 2.0 * p)


def _normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _normal_pdf_deriv(x):
    x = np.asarray(x, dtype=float)
    return -x * np.exp(-0.5 * x * x) / _SQRT_2PI


def logistic_link() -> LinkModel:
    """Logistic kernel; overflow-safe through |x| <= 700."""
    return LinkModel(
        name="logistic",
        cdf=special.expit,
        pdf=_logistic_pdf,
        pdf_deriv=_logistic_pdf_deriv,
        quantile=special.logit,
    )


def probit_link() -> LinkModel:
    """Standard normal kernel (unit scale)."""
    return LinkModel(
        name="probit",
        cdf=special.ndtr,
        pdf=_normal_pdf,
        pdf_deriv=_normal_pdf_deriv,
        quantile=special.ndtri,
    )


_REGISTRY: dict[str, LinkModel] = {
    "logistic": logistic_link(),
    "probit": probit_link(),
}


def available_links() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def get_link(name: str) -> LinkModel:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(available_links())
        raise LinkValidationError(f"unknown link {name!r}; available: {known}") from None


def _bisect_quantile(cdf: Kernel, p: float) -> float:
    # Monotone bisection on a geometrically expanded bracket, to 1e-12.
    if not 0.0 < p < 1.0:
        raise LinkValidationError(f"quantile argument must lie in (0, 1), got {p}")
    lo, hi = -1.0, 1.0
    while float(cdf(np.float64(lo))) > p:
        lo *= 2.0
        if lo < -1e9:
            raise LinkValidationError("quantile bracket expansion failed (lower)")
    while float(cdf(np.float64(hi))) < p:
        hi *= 2.0
        if hi > 1e9:
            raise LinkValidationError("quantile bracket expansion failed (upper)")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if float(cdf(np.float64(mid))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _finite_diff(f: Kernel, h: float = 1e-5) -> Kernel:
    def deriv(x):
        x = np.asarray(x, dtype=float)
        return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h)

    return deriv


def custom_link(
    name: str,
    cdf: Kernel,
    pdf: Kernel | None = None,
    pdf_deriv: Kernel | None = None,
    quantile: Kernel | None = None,
) -> LinkModel:
    """Assemble a LinkModel, filling missing pieces numerically.

    Missing derivatives use central differences; a missing quantile uses
    monotone bisection. The result still has to pass ``register_link`` (or
    ``validate_link``) before the rest of the stack will trust it.
    """
    if pdf is None:
        pdf = _finite_diff(cdf)
    if pdf_deriv is None:
        pdf_deriv = _finite_diff(pdf)
    if quantile is None:
        base = cdf

        def quantile(p, _cdf=base):
            p = np.asarray(p, dtype=float)
            if p.ndim == 0:
                return _bisect_quantile(_cdf, float(p))
            return np.array([_bisect_quantile(_cdf, float(v)) for v in p.ravel()]).reshape(p.shape)

    return LinkModel(name=name, cdf=cdf, pdf=pdf, pdf_deriv=pdf_deriv, quantile=quantile)


def validate_link(link: LinkModel, grid_half_width: float = 10.0) -> None:
    """Reject kernels that are not symmetric CDFs with positive density."""
    x = np.linspace(-grid_half_width, grid_half_width, 401)
    f = np.asarray(link.cdf(x), dtype=float)
    if not np.all(np.isfinite(f)):
        raise LinkValidationError(f"link {link.name!r}: cdf not finite on the test grid")
    sym = np.max(np.abs(f + f[::-1] - 1.0))
    if sym > 1e-9:
        raise LinkValidationError(
            f"link {link.name!r}: cdf violates F(x)+F(-x)=1 (max deviation {sym:.2e})"
        )
    dens = np.asarray(link.pdf(x), dtype=float)
    if not np.all(dens > 0.0):
        raise LinkValidationError(f"link {link.name!r}: density must be strictly positive")
    if np.any(np.diff(f) <= 0.0):
        raise LinkValidationError(f"link {link.name!r}: cdf must be strictly increasing")


def register_link(link: LinkModel) -> LinkModel:
    """Validate and expose a kernel under its name. Returns the link."""
    validate_link(link)
    _REGISTRY[link.name] = link
    return link


def derivative_bounds(link: LinkModel, radius: float) -> DerivativeBounds:
    """Envelope constants valid on |x| <= 2 * radius.

    Closed forms for the stock kernels; a dense grid search otherwise. The
    logistic curvature bound 1/4 and the probit bound e^{-1/2}/sqrt(2 pi)
    are interval-independent upper bounds.
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if link.name == "logistic":
        e2r = math.exp(2.0 * radius)
        return DerivativeBounds(
            slope_min=e2r / (1.0 + e2r) ** 2,
            slope_max=0.25,
            curvature_max=0.25,
            radius=radius,
        )
    if link.name == "probit":
        return DerivativeBounds(
            slope_min=float(_normal_pdf(2.0 * radius)),
            slope_max=1.0 / _SQRT_2PI,
            curvature_max=math.exp(-0.5) / _SQRT_2PI,
            radius=radius,
        )
    # Grid search for custom kernels; margins absorb the grid discretization.
    x = np.linspace(-2.0 * radius, 2.0 * radius, 200_001) if radius > 0 else np.zeros(1)
    dens = np.asarray(link.pdf(x), dtype=float)
    curv = np.abs(np.asarray(link.pdf_deriv(x), dtype=float))
    margin = 1e-7
    slope_min = float(np.min(dens)) - margin
    if slope_min <= 0.0:
        raise LinkValidationError(
            f"link {link.name!r}: density lower bound vanished on radius {radius}"
        )
    return DerivativeBounds(
        slope_min=slope_min,
        slope_max=float(np.max(dens)) + margin,
        curvature_max=float(np.max(curv)) + margin,
        radius=radius,
    )
