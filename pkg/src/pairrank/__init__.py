"""Merit estimation and inference for paired comparison data.

The package fits merit parameters by matching expected win counts to the
observed ones under a chosen link kernel, certifies the Newton solve, and
builds confidence intervals from a sparse proxy for the inverse Jacobian.
Sub-packages add CSV ingestion, sports-style rankings and playoff seeding,
Monte Carlo study drivers, a command line tool, and an HTTP service.
"""

from .data import ComparisonData
from .errors import (
    DataValidationError,
    DivergedError,
    FitError,
    IngestError,
    LinkValidationError,
    NotConnectedError,
    PairRankError,
    SingularJacobianError,
    ZeroDiagonalError,
)
from .estimator import (
    FitConfig,
    FitResult,
    KantorovichDiagnostics,
    MomentSystem,
    fit,
    kantorovich_diagnostics,
)
from .graph import GraphDiagnostics, graph_diagnostics
from .inference import (
    CovarianceReport,
    Interval,
    approx_inverse,
    approx_inverse_error_bound,
    confidence_interval,
    covariance_report,
    pair_variance,
    z_statistic,
)
from .ingest import (
    GameRecord,
    aggregate,
    export_games,
    ingest,
    ingest_text,
    read_grouping,
)
from .links import LinkModel, available_links, get_link, logistic_link, probit_link
from .ranking import RankEntry, RankReport, rank_report, seed_selection
from .simulate import (
    SimulationCell,
    SimulationReport,
    run_connectivity_study,
    run_consistency_study,
    run_coverage_study,
)

__version__ = "0.1.0"

__all__ = [
    "ComparisonData",
    "CovarianceReport",
    "DataValidationError",
    "DivergedError",
    "FitConfig",
    "FitError",
    "FitResult",
    "GameRecord",
    "GraphDiagnostics",
    "IngestError",
    "Interval",
    "KantorovichDiagnostics",
    "LinkModel",
    "LinkValidationError",
    "MomentSystem",
    "NotConnectedError",
    "PairRankError",
    "RankEntry",
    "RankReport",
    "SimulationCell",
    "SimulationReport",
    "SingularJacobianError",
    "ZeroDiagonalError",
    "aggregate",
    "approx_inverse",
    "approx_inverse_error_bound",
    "available_links",
    "confidence_interval",
    "covariance_report",
    "export_games",
    "fit",
    "get_link",
    "graph_diagnostics",
    "ingest",
    "ingest_text",
    "kantorovich_diagnostics",
    "logistic_link",
    "pair_variance",
    "probit_link",
    "rank_report",
    "read_grouping",
    "run_connectivity_study",
    "run_consistency_study",
    "run_coverage_study",
    "seed_selection",
    "z_statistic",
    "__version__",
]
