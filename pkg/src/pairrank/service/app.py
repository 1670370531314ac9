"""HTTP facade over the core package.

The handle_* functions do the real work on validated request models and are
plain callables, so the command line client can run them in process; the
FastAPI routes only add transport and error mapping (bad input becomes 400,
estimation failure becomes 409).
"""

from __future__ import annotations

from importlib import metadata

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import datasets
from ..data import ComparisonData
from ..errors import FitError, PairRankError
from ..estimator import FitConfig, MomentSystem, fit, kantorovich_diagnostics
from ..graph import graph_diagnostics
from ..inference import covariance_report
from ..ingest import (
    GameRecord,
    aggregate,
    export_games,
    grouping_from_text,
    ingest,
    ingest_text,
    read_grouping,
)
from ..links import available_links, get_link
from ..ranking import RankReport, rank_report, seed_selection
from ..simulate import (
    SimulationCell,
    run_connectivity_study,
    run_consistency_study,
    run_coverage_study,
)
from .schemas import (
    DatasetSpec,
    FitRequest,
    FitResponse,
    GraphInfo,
    HealthResponse,
    IngestResponse,
    KantorovichInfo,
    LinksResponse,
    RankRow,
    SeedsRequest,
    SeedsResponse,
    SimulateRequest,
    SimulateResponse,
    SolverInfo,
    SubjectSummary,
)


def resolve_dataset(spec: DatasetSpec) -> ComparisonData:
    """Materialize the comparison matrices a request is talking about."""
    kwargs = dict(
        tie_policy=spec.tie_policy,
        baseline=spec.baseline,
        subject_order=spec.subject_order,
    )
    if spec.bundled is not None:
        return ingest(datasets.resolve_games_source(spec.bundled), **kwargs)
    if spec.csv_text is not None:
        return ingest_text(spec.csv_text, **kwargs)
    records = [
        GameRecord(r.winner, r.loser, count=r.count, tie=r.result == "tie")
        for r in spec.games or ()
    ]
    return aggregate(records, **kwargs)


def resolve_grouping(spec) -> dict[str, tuple[str, str]]:
    if spec.bundled is not None:
        return read_grouping(datasets.resolve_grouping_source(spec.bundled))
    return grouping_from_text(spec.csv_text)


def _graph_info(data: ComparisonData) -> GraphInfo:
    d = graph_diagnostics(data)
    return GraphInfo(
        t_graph_connected=d.t_graph_connected,
        win_digraph_strongly_connected=d.win_digraph_strongly_connected,
        t_min=d.t_min,
        t_max=d.t_max,
        min_common_neighbors=d.min_common_neighbors,
        tau=d.tau,
    )


def handle_ingest(spec: DatasetSpec) -> IngestResponse:
    data = resolve_dataset(spec)
    subjects = [
        SubjectSummary(
            label=data.label_of(i),
            wins=float(data.scores[i]),
            games=int(data.totals[i]),
        )
        for i in range(data.n_plus_1)
    ]
    return IngestResponse(
        n_subjects=data.n_plus_1,
        baseline=data.label_of(0),
        subjects=subjects,
        diagnostics=_graph_info(data),
        canonical_csv=export_games(data),
    )


def _fit_report(
    data: ComparisonData, link_name: str, tolerance: float | None, max_iterations: int
) -> tuple[MomentSystem, RankReport, object]:
    system = MomentSystem(data, get_link(link_name))
    result = fit(system, FitConfig(tolerance=tolerance, max_iterations=max_iterations))
    covariance = covariance_report(system, result.merits)
    return system, rank_report(data, result, covariance), result


def handle_fit(request: FitRequest) -> FitResponse:
    data = resolve_dataset(request.dataset)
    system, report, result = _fit_report(
        data, request.link, request.tolerance, request.max_iterations
    )
    kantorovich = kantorovich_diagnostics(
        system, result.merits, request.kantorovich_radius
    )
    entries = [
        RankRow(
            rank=position + 1,
            label=entry.label,
            merit=entry.merit,
            standard_error=entry.standard_error,
            wins=entry.wins,
            games=entry.games,
            pct=entry.pct,
            tied=entry.tied,
        )
        for position, entry in enumerate(report.entries)
    ]
    return FitResponse(
        link=request.link,
        baseline=report.baseline_label,
        entries=entries,
        solver=SolverInfo(
            iterations=result.iterations,
            converged=result.converged,
            residual_inf_norm=result.residual_inf_norm,
            strongly_connected=result.strongly_connected,
        ),
        kantorovich=KantorovichInfo(**kantorovich.as_dict()),
        diagnostics=_graph_info(data),
    )


def handle_seeds(request: SeedsRequest) -> SeedsResponse:
    data = resolve_dataset(request.dataset)
    _, report, _ = _fit_report(data, request.link, None, 100)
    grouping = resolve_grouping(request.grouping)
    selected = seed_selection(report, grouping, rule=request.rule)
    return SeedsResponse(
        rule=request.rule,
        conferences={conf: list(teams) for conf, teams in selected.items()},
    )


def handle_simulate(request: SimulateRequest) -> SimulateResponse:
    if request.study == "consistency":
        reports = run_consistency_study(
            request.n_list,
            request.p_rule,
            request.c,
            request.replications,
            request.master_seed,
            comparisons_per_pair=request.comparisons_per_pair,
            link_name=request.link,
            sampling_scale=request.sampling_scale,
            workers=request.workers,
        )
        return SimulateResponse(
            study=request.study, reports=[r.to_record() for r in reports]
        )
    cell = SimulationCell(
        n=request.n,
        comparisons_per_pair=request.comparisons_per_pair,
        p_rule=request.p_rule,
        c=request.c,
        replications=request.replications,
        master_seed=request.master_seed,
        pairs=tuple(tuple(p) for p in request.pairs),
        link_name=request.link,
        sampling_scale=request.sampling_scale,
    )
    if request.study == "connectivity":
        report = run_connectivity_study(cell, workers=request.workers)
    else:
        report = run_coverage_study(cell, level=request.level, workers=request.workers)
    return SimulateResponse(study=request.study, reports=[report.to_record()])


def create_app() -> FastAPI:
    app = FastAPI(title="pairrank", version=metadata.version("pairrank"))

    @app.exception_handler(PairRankError)
    async def pairrank_error(request: Request, exc: PairRankError):
        # FitError covers estimation breakdowns on well-formed input; those
        # map to conflict, everything else in the hierarchy is a bad request.
        status = 409 if isinstance(exc, FitError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health():
        return HealthResponse(status="ok", version=metadata.version("pairrank"))

    @app.get("/links", response_model=LinksResponse)
    async def links():
        return LinksResponse(links=list(available_links()))

    @app.post("/ingest", response_model=IngestResponse)
    async def ingest_route(spec: DatasetSpec):
        return handle_ingest(spec)

    @app.post("/fit", response_model=FitResponse)
    async def fit_route(request: FitRequest):
        return handle_fit(request)

    @app.post("/seeds", response_model=SeedsResponse)
    async def seeds_route(request: SeedsRequest):
        return handle_seeds(request)

    @app.post("/simulate", response_model=SimulateResponse)
    async def simulate_route(request: SimulateRequest):
        return handle_simulate(request)

    return app


app = create_app()
