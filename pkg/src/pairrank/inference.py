"""Closed-form uncertainty for fitted merits.

The Jacobian inverse is approximated by the sparse proxy
s_ij = delta_ij / v_ii + 1 / v_00, whose error is controlled by an explicit
bound in the random-design regime. Plugging the fitted merits into the
binomial score variance yields per-subject variances, pairwise confidence
intervals, and z statistics without any resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg, special

from .data import ComparisonData
from .errors import DataValidationError, ZeroDiagonalError
from .estimator import JacobianView, MomentSystem, jacobian
from .links import DerivativeBounds, LinkModel


def approx_inverse(view: JacobianView) -> np.ndarray:
    """Sparse inverse proxy S with s_ij = delta_ij / v_ii + 1 / v_00."""
    diag = np.diag(view.matrix)
    if np.any(diag <= 0.0) or view.baseline_diag <= 0.0:
        raise ZeroDiagonalError(
            "every subject, baseline included, needs a positive Jacobian diagonal"
        )
    s = np.full_like(view.matrix, 1.0 / view.baseline_diag)
    s[np.diag_indices_from(s)] += 1.0 / diag
    return s


def approx_inverse_error_bound(
    n: int, comparisons_per_pair: int, pair_probability: float, bounds: DerivativeBounds
) -> float:
    """Max-norm bound on V^-1 - S for the random design Bin(T, p)."""
    if n < 2:
        raise DataValidationError(f"bound needs n >= 2, got {n}")
    if pair_probability <= 0.0:
        raise DataValidationError("pair probability must be positive")
    return (
        12.0
        * comparisons_per_pair
        * bounds.slope_max**2
        / (bounds.slope_min**3 * n * (n - 1) * pair_probability**3)
    )


def approx_inverse_error_bound_fixed(
    n: int,
    comparisons_per_pair: int,
    tau: float,
    rho_max: float,
    bounds: DerivativeBounds,
) -> float:
    """Fixed-design sibling bound 2 T^2 b1^2 rho_max / (b0^3 tau^3 n^2).

    rho_max is the largest per-subject total divided by n; tau the minimum
    common-opponent share.
    """
    if n < 2:
        raise DataValidationError(f"bound needs n >= 2, got {n}")
    if tau <= 0.0:
        raise DataValidationError("tau must be positive; graph has isolated pairs")
    return (
        2.0
        * comparisons_per_pair**2
        * bounds.slope_max**2
        * rho_max
        / (bounds.slope_min**3 * tau**3 * n**2)
    )


def conditional_variance(
    data: ComparisonData, merits: np.ndarray, link: LinkModel
) -> np.ndarray:
    """Binomial score variances u_ii = sum_j t_ij p_ij (1 - p_ij), all subjects."""
    merits = np.asarray(merits, dtype=float)
    diffs = merits[:, None] - merits[None, :]
    # 1 - F(x) computed as F(-x): exact under the symmetry the links guarantee.
    p = np.asarray(link.cdf(diffs))
    q = np.asarray(link.cdf(-diffs))
    return (data.t * p * q).sum(axis=1)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    level: float
    valid: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True, eq=False)
class CovarianceReport:
    """Plug-in covariance structure at the fitted merits.

    variance_diag[i] is the squared standard error of merit i relative to
    the baseline; the baseline's own entry uses the same formula with both
    terms taken at the baseline, which keeps the report total (one value per
    subject) and matches how a fixed-schedule table reports the baseline row.
    """

    merits: np.ndarray
    jacobian: JacobianView
    score_variance: np.ndarray

    @property
    def baseline(self) -> int:
        return self.jacobian.baseline

    @cached_property
    def _ratio(self) -> np.ndarray:
        """u_ii / v_ii^2 per subject, baseline included."""
        n_plus_1 = self.merits.shape[0]
        diag = np.empty(n_plus_1)
        diag[self.jacobian.free_index] = np.diag(self.jacobian.matrix)
        diag[self.baseline] = self.jacobian.baseline_diag
        if np.any(diag <= 0.0):
            raise ZeroDiagonalError("subject with no comparisons has no variance")
        return self.score_variance / diag**2

    @cached_property
    def variance_diag(self) -> np.ndarray:
        return self._ratio + self._ratio[self.baseline]

    @cached_property
    def se(self) -> np.ndarray:
        return np.sqrt(self.variance_diag)

    @cached_property
    def approx_inverse(self) -> np.ndarray:
        return approx_inverse(self.jacobian)

    @cached_property
    def covariance_matrix(self) -> np.ndarray:
        """Free-block covariance: diag(u_ii/v_ii^2) + u_00/v_00^2 everywhere."""
        free = self.jacobian.free_index
        sigma = np.full((free.size, free.size), self._ratio[self.baseline])
        sigma[np.diag_indices_from(sigma)] += self._ratio[free]
        return sigma


def covariance_report(system: MomentSystem, merits: np.ndarray) -> CovarianceReport:
    merits = np.asarray(merits, dtype=float)
    return CovarianceReport(
        merits=merits,
        jacobian=jacobian(system, merits),
        score_variance=conditional_variance(system.data, merits, system.link),
    )


def pair_variance(report: CovarianceReport, i: int, j: int) -> float:
    """Variance of the fitted difference merit_i - merit_j.

    For two free subjects the shared baseline covariance cancels, leaving
    u_ii/v_ii^2 + u_jj/v_jj^2; a pair involving the baseline keeps the
    baseline term.
    """
    if i == j:
        raise DataValidationError("pair variance needs two distinct subjects")
    ratio = report._ratio
    if i == report.baseline or j == report.baseline:
        other = j if i == report.baseline else i
        return float(ratio[other] + ratio[report.baseline])
    return float(ratio[i] + ratio[j])


def confidence_interval(
    report: CovarianceReport, i: int, j: int, level: float = 0.95
) -> Interval:
    """Two-sided interval for merit_i - merit_j at the given level."""
    if not 0.0 < level < 1.0:
        raise DataValidationError(f"level must lie in (0, 1), got {level}")
    variance = pair_variance(report, i, j)
    center = float(report.merits[i] - report.merits[j])
    if not (variance > 0.0 and math.isfinite(variance)):
        return Interval(lower=center, upper=center, level=level, valid=False)
    half = float(special.ndtri((1.0 + level) / 2.0)) * math.sqrt(variance)
    return Interval(lower=center - half, upper=center + half, level=level, valid=True)


def z_statistic(report: CovarianceReport, i: int, j: int, true_difference: float) -> float:
    """Standardized deviation of the fitted difference from a hypothesized one."""
    variance = pair_variance(report, i, j)
    estimate = float(report.merits[i] - report.merits[j])
    return (estimate - true_difference) / math.sqrt(variance)


def covariance_exact(report: CovarianceReport, data: ComparisonData, link: LinkModel) -> np.ndarray:
    """Exact sandwich V^-1 U V^-1 over the free block, for comparison with S-based sigma."""
    merits = report.merits
    diffs = merits[:, None] - merits[None, :]
    p = np.asarray(link.cdf(diffs))
    q = np.asarray(link.cdf(-diffs))
    u_full = -(data.t * p * q)
    u_full[np.diag_indices_from(u_full)] = report.score_variance
    free = report.jacobian.free_index
    u_block = u_full[np.ix_(free, free)]
    v_inv = linalg.inv(report.jacobian.matrix)
    return v_inv @ u_block @ v_inv
