"""Request and response models for the ranking service.

Every endpoint is stateless: the dataset travels inside the request, either
as raw CSV text, as structured rows, or as the name of a bundled dataset.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class GameRow(BaseModel):
    """One observed pairing, same semantics as a CSV row."""

    winner: str
    loser: str
    count: int = Field(default=1, ge=1)
    result: Literal["win", "tie"] = "win"


class DatasetSpec(BaseModel):
    """Where the comparison data comes from and how to book it.

    Exactly one of ``csv_text``, ``games``, ``bundled`` must be set.
    """

    csv_text: str | None = None
    games: list[GameRow] | None = None
    bundled: Literal["nfl2018"] | None = None
    tie_policy: Literal["drop", "half"] = "drop"
    baseline: str = "fewest-wins"
    subject_order: list[str] | None = None

    @model_validator(mode="after")
    def _one_source(self):
        given = sum(x is not None for x in (self.csv_text, self.games, self.bundled))
        if given != 1:
            raise ValueError("provide exactly one of csv_text, games, bundled")
        return self


class GroupingSpec(BaseModel):
    """Conference and division labels, as CSV text or a bundled name."""

    csv_text: str | None = None
    bundled: Literal["nfl2018"] | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.csv_text is None) == (self.bundled is None):
            raise ValueError("provide exactly one of csv_text, bundled")
        return self


class GraphInfo(BaseModel):
    t_graph_connected: bool
    win_digraph_strongly_connected: bool
    t_min: int
    t_max: int
    min_common_neighbors: int
    tau: float


class SubjectSummary(BaseModel):
    label: str
    wins: float
    games: int


class IngestResponse(BaseModel):
    n_subjects: int
    baseline: str
    subjects: list[SubjectSummary]
    diagnostics: GraphInfo
    canonical_csv: str


class FitRequest(BaseModel):
    dataset: DatasetSpec
    link: str = "probit"
    tolerance: float | None = None
    max_iterations: int = Field(default=100, ge=1)
    kantorovich_radius: float = Field(default=1.0, gt=0)


class RankRow(BaseModel):
    rank: int
    label: str
    merit: float
    standard_error: float
    wins: float
    games: int
    pct: float
    tied: bool


class SolverInfo(BaseModel):
    iterations: int
    converged: bool
    residual_inf_norm: float
    strongly_connected: bool


class KantorovichInfo(BaseModel):
    curvature_bound: float
    first_step_norm: float
    h: float
    convergence_radius: float
    certified: bool


class FitResponse(BaseModel):
    link: str
    baseline: str
    entries: list[RankRow]
    solver: SolverInfo
    kantorovich: KantorovichInfo
    diagnostics: GraphInfo


class SeedsRequest(BaseModel):
    dataset: DatasetSpec
    grouping: GroupingSpec
    rule: Literal["pct", "merit"] = "pct"
    link: str = "probit"


class SeedsResponse(BaseModel):
    rule: str
    conferences: dict[str, list[str]]


class SimulateRequest(BaseModel):
    """One Monte Carlo cell, or a ladder of sizes for the consistency study."""

    model_config = ConfigDict(protected_namespaces=())

    study: Literal["connectivity", "coverage", "consistency"]
    n: int | None = Field(default=None, ge=2)
    n_list: list[int] | None = None
    comparisons_per_pair: int = Field(default=1, ge=1)
    p_rule: str
    c: float
    replications: int = Field(default=100, ge=1)
    master_seed: int = 0
    pairs: list[tuple[int, int]] = Field(default_factory=list)
    level: float = Field(default=0.95, gt=0, lt=1)
    link: str = "probit"
    sampling_scale: float = Field(default=1.0, ge=0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _size_matches_study(self):
        if self.study == "consistency":
            if not self.n_list:
                raise ValueError("consistency study needs n_list")
        elif self.n is None:
            raise ValueError(f"{self.study} study needs n")
        return self


class SimulateResponse(BaseModel):
    study: str
    reports: list[dict]


class HealthResponse(BaseModel):
    status: str
    version: str


class LinksResponse(BaseModel):
    links: list[str]
