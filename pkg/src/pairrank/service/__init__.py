"""Stateless HTTP service and its request/response models."""

from .app import (
    app,
    create_app,
    handle_fit,
    handle_ingest,
    handle_seeds,
    handle_simulate,
    resolve_dataset,
    resolve_grouping,
)
from .schemas import (
    DatasetSpec,
    FitRequest,
    FitResponse,
    GameRow,
    GroupingSpec,
    IngestResponse,
    SeedsRequest,
    SeedsResponse,
    SimulateRequest,
    SimulateResponse,
)

__all__ = [
    "app",
    "create_app",
    "handle_fit",
    "handle_ingest",
    "handle_seeds",
    "handle_simulate",
    "resolve_dataset",
    "resolve_grouping",
    "DatasetSpec",
    "FitRequest",
    "FitResponse",
    "GameRow",
    "GroupingSpec",
    "IngestResponse",
    "SeedsRequest",
    "SeedsResponse",
    "SimulateRequest",
    "SimulateResponse",
]
