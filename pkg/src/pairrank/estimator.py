"""Merit estimation by solving the score-matching equations with Newton steps.

The estimator solves, for every non-baseline subject i,

    sum_j t_ij * F(merit_i - merit_j) = observed score a_i,

with the baseline merit pinned to zero. The free-block Jacobian is symmetric
and positive definite whenever the comparison graph is connected and the
link density is positive, so each step is a dense Cholesky solve. A
Newton-Kantorovich certificate (curvature bound K, first step size eta,
h = K * eta) is available as a separate diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .data import ComparisonData
from .errors import (
    DataValidationError,
    DivergedError,
    NotConnectedError,
    SingularJacobianError,
)
from .graph import is_connected, is_strongly_connected
from .links import LinkModel, derivative_bounds

MAX_STEP_HALVINGS = 30
DIVERGENCE_NORM = 1e3


@dataclass(frozen=True, eq=False)
class MomentSystem:
    """A comparison dataset plus the link and baseline that define the equations."""

    data: ComparisonData
    link: LinkModel
    baseline: int = 0

    def __post_init__(self):
        if not 0 <= self.baseline < self.data.n_plus_1:
            raise DataValidationError(
                f"baseline index {self.baseline} out of range for "
                f"{self.data.n_plus_1} subjects"
            )

    @cached_property
    def free_index(self) -> np.ndarray:
        """Subject indices whose merits are free parameters."""
        idx = np.array(
            [i for i in range(self.data.n_plus_1) if i != self.baseline], dtype=np.intp
        )
        idx.setflags(write=False)
        return idx


@dataclass(frozen=True, eq=False)
class JacobianView:
    """Free-block Jacobian plus its baseline border.

    matrix is the n x n block over free subjects; baseline_row holds the
    cross entries against the baseline (each -t_{b,i} * F'(diff), so
    nonpositive); baseline_diag is the baseline's own diagonal entry. Every
    full row, border included, sums to zero.
    """

    matrix: np.ndarray
    baseline_row: np.ndarray
    baseline_diag: float
    free_index: np.ndarray
    baseline: int


@dataclass(frozen=True, eq=False)
class KantorovichDiagnostics:
    """Newton convergence certificate at a given start point.

    certified means h = curvature_bound * first_step_norm <= 1/2, in which
    case the iteration is guaranteed to converge to a root within
    convergence_radius of the start (sup norm).
    """

    curvature_bound: float
    first_step_norm: float
    h: float
    convergence_radius: float
    certified: bool

    def error_bound_at(self, iteration: int) -> float:
        """Sup-norm distance bound between iterate k and the root."""
        if iteration < 1:
            raise ValueError("iteration must be >= 1")
        if not self.certified:
            return math.nan
        two_h = 2.0 * self.h
        return 2.0 ** (1 - iteration) * two_h ** (2.0**iteration - 1) * self.first_step_norm

    def as_dict(self) -> dict:
        return {
            "curvature_bound": self.curvature_bound,
            "first_step_norm": self.first_step_norm,
            "h": self.h,
            "convergence_radius": self.convergence_radius,
            "certified": self.certified,
        }


@dataclass(frozen=True, eq=False)
class FitResult:
    merits: np.ndarray
    residual_inf_norm: float
    iterations: int
    converged: bool
    strongly_connected: bool
    kantorovich: KantorovichDiagnostics | None = None


@dataclass(frozen=True)
class FitConfig:
    """Solver knobs. tolerance None means 1e-10 * max(1, t_max)."""

    tolerance: float | None = None
    max_iterations: int = 100
    initial: np.ndarray | None = None
    damped: bool = True


def _residual_all(system: MomentSystem, merits: np.ndarray) -> np.ndarray:
    """Expected-minus-observed scores for every subject, baseline included."""
    diffs = merits[:, None] - merits[None, :]
    expected = (system.data.t * np.asarray(system.link.cdf(diffs))).sum(axis=1)
    return expected - system.data.scores


def moment_residual(system: MomentSystem, merits: np.ndarray) -> np.ndarray:
    """Residuals of the estimating equations at the free subjects."""
    merits = np.asarray(merits, dtype=float)
    if merits.shape != (system.data.n_plus_1,):
        raise DataValidationError(
            f"merit vector shape {merits.shape} does not match "
            f"{system.data.n_plus_1} subjects"
        )
    return _residual_all(system, merits)[system.free_index]


def jacobian(system: MomentSystem, merits: np.ndarray) -> JacobianView:
    """Jacobian of the free residuals, split into free block and baseline border."""
    merits = np.asarray(merits, dtype=float)
    diffs = merits[:, None] - merits[None, :]
    weights = system.data.t * np.asarray(system.link.pdf(diffs))
    row_sums = weights.sum(axis=1)
    free = system.free_index
    matrix = np.diag(row_sums[free]) - weights[np.ix_(free, free)]
    baseline_row = -weights[system.baseline, free]
    baseline_row.setflags(write=False)
    matrix.setflags(write=False)
    return JacobianView(
        matrix=matrix,
        baseline_row=baseline_row,
        baseline_diag=float(row_sums[system.baseline]),
        free_index=free,
        baseline=system.baseline,
    )


def default_tolerance(data: ComparisonData) -> float:
    return 1e-10 * max(1.0, float(data.totals.max()))


def fit(system: MomentSystem, config: FitConfig = FitConfig()) -> FitResult:
    """Damped Newton solve of the score-matching equations.

    Raises NotConnectedError when the undirected comparison graph is
    disconnected, SingularJacobianError when a factorization fails, and
    DivergedError when the iterate leaves the trust region or the iteration
    cap is hit (the practical signature of a nonexistent estimate). A win
    digraph that is not strongly connected is reported on the result, not
    raised, since the fit may still converge.
    """
    data = system.data
    if not is_connected(data.t):
        raise NotConnectedError(
            "comparison graph is disconnected; merits are not jointly identified"
        )
    strongly = is_strongly_connected(data.a)

    if config.initial is None:
        merits = np.zeros(data.n_plus_1)
    else:
        merits = np.asarray(config.initial, dtype=float).copy()
        if merits.shape != (data.n_plus_1,):
            raise DataValidationError("initial merit vector has the wrong length")
        if merits[system.baseline] != 0.0:
            raise DataValidationError("initial merit vector must pin the baseline to 0")
    tol = config.tolerance if config.tolerance is not None else default_tolerance(data)
    free = system.free_index

    residual = _residual_all(system, merits)[free]
    norm = float(np.max(np.abs(residual))) if residual.size else 0.0
    for iteration in range(config.max_iterations):
        if norm <= tol:
            return FitResult(
                merits=merits,
                residual_inf_norm=norm,
                iterations=iteration,
                converged=True,
                strongly_connected=strongly,
            )
        view = jacobian(system, merits)
        try:
            factor = linalg.cho_factor(view.matrix, lower=True, check_finite=False)
        except linalg.LinAlgError as exc:
            raise SingularJacobianError(f"Cholesky factorization failed: {exc}") from exc
        step = linalg.cho_solve(factor, residual, check_finite=False)

        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = merits.copy()
            candidate[free] -= scale * step
            cand_residual = _residual_all(system, candidate)[free]
            cand_norm = float(np.max(np.abs(cand_residual)))
            if not config.damped or cand_norm <= norm or not math.isfinite(norm):
                break
            scale *= 0.5
        merits, residual, norm = candidate, cand_residual, cand_norm
        if np.max(np.abs(merits)) > DIVERGENCE_NORM:
            raise DivergedError(
                f"merit norm exceeded {DIVERGENCE_NORM:g}; estimate likely does not exist"
            )
    if norm <= tol:
        return FitResult(
            merits=merits,
            residual_inf_norm=norm,
            iterations=config.max_iterations,
            converged=True,
            strongly_connected=strongly,
        )
    raise DivergedError(
        f"no convergence in {config.max_iterations} iterations "
        f"(residual {norm:.3e}, tolerance {tol:.3e})"
    )


def kantorovich_diagnostics(
    system: MomentSystem,
    start: np.ndarray,
    radius: float,
    comparisons_per_pair: int | None = None,
    pair_probability: float | None = None,
) -> KantorovichDiagnostics:
    """Certificate for Newton started at ``start``.

    radius bounds the sup norm of the merit vectors involved, so link
    derivative bounds are taken over differences within 2 * radius. The
    curvature bound needs the design parameters T and p of the random
    comparison graph; when not supplied they are plugged in from the data
    (largest pair count, observed pair density).
    """
    # Imported here, not at the top, to avoid an import cycle.
    from .inference import approx_inverse_error_bound

    data = system.data
    start = np.asarray(start, dtype=float)
    n_free = system.free_index.size
    view = jacobian(system, start)
    try:
        factor = linalg.cho_factor(view.matrix, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularJacobianError(
            f"Jacobian at the start point is not positive definite: {exc}"
        ) from exc
    residual = _residual_all(system, start)[system.free_index]
    eta = float(np.max(np.abs(linalg.cho_solve(factor, residual, check_finite=False))))

    off_diag = data.t[~np.eye(data.n_plus_1, dtype=bool)]
    if comparisons_per_pair is None:
        comparisons_per_pair = max(1, int(off_diag.max()))
    if pair_probability is None:
        n_pairs = data.n_plus_1 * (data.n_plus_1 - 1) // 2
        pair_probability = float(np.count_nonzero(off_diag) / 2) / n_pairs

    bounds = derivative_bounds(system.link, radius)
    t_min = float(data.totals.min())
    t_max = float(data.totals.max())
    if t_min <= 0.0 or pair_probability <= 0.0:
        curvature = math.inf
    else:
        if n_free >= 2:
            inverse_gap = approx_inverse_error_bound(
                n_free, comparisons_per_pair, pair_probability, bounds
            )
        else:
            # One free subject: the random-design bound is undefined, but the
            # gap is exact arithmetic on a 1x1 system.
            inverse_gap = float(
                abs(1.0 / view.matrix[0, 0] - (1.0 / view.matrix[0, 0] + 1.0 / view.baseline_diag))
            )
        curvature = (
            2.0 / (bounds.slope_min * t_min) + n_free * inverse_gap
        ) * 4.0 * bounds.curvature_max * t_max

    h = curvature * eta
    certified = bool(h <= 0.5)
    t_star = 2.0 * eta / (1.0 + math.sqrt(1.0 - 2.0 * h)) if certified else math.nan
    return KantorovichDiagnostics(
        curvature_bound=curvature,
        first_step_norm=eta,
        h=h,
        convergence_radius=t_star,
        certified=certified,
    )
