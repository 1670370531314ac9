"""Monte Carlo studies over random comparison designs.

Three study kinds share one cell description:

* connectivity: how often the sampled win digraph fails strong connectivity;
* coverage: pairwise confidence interval coverage, length, and fit-failure
  rate under the moment estimator;
* consistency: sup-norm estimation error as n grows under a sparsity rule.

Every replication draws its own child generator from (master_seed, index),
and aggregation uses exact counters plus exactly rounded float summation, so
reports are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from statistics import median
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DataValidationError, FitError
from .estimator import FitConfig, MomentSystem, fit
from .graph import (
    is_strongly_connected,
    linear_merits,
    replication_rng,
    sample_er_graph,
    sample_outcomes,
)
from .inference import confidence_interval, covariance_report
from .links import get_link

_POWER_RULE = re.compile(r"^\(log n/n\)\^\(?([0-9./]+)\)?$")


def resolve_pair_probability(n: int, p_rule: float | str) -> float:
    """Turn a sparsity rule into a number.

    Accepts an explicit probability (numeric or as a string), the string
    "log n/n", or "(log n/n)^e" with e a decimal or a fraction like 2/3.
    """
    if isinstance(p_rule, (int, float)):
        p = float(p_rule)
    else:
        rule = p_rule.strip()
        if rule == "log n/n":
            p = math.log(n) / n
        else:
            try:
                return resolve_pair_probability(n, float(rule))
            except ValueError:
                pass
            m = _POWER_RULE.match(rule)
            if m is None:
                raise DataValidationError(
                    f"cannot parse sparsity rule {p_rule!r}; use an explicit number, "
                    '"log n/n", or "(log n/n)^e"'
                )
            text = m.group(1)
            if "/" in text:
                num, den = text.split("/", 1)
                exponent = float(num) / float(den)
            else:
                exponent = float(text)
            p = (math.log(n) / n) ** exponent
    if not 0.0 < p <= 1.0:
        raise DataValidationError(f"rule {p_rule!r} gives p={p:.4g} outside (0, 1]")
    return p


@dataclass(frozen=True)
class SimulationCell:
    """One study configuration: n free subjects plus design and merit knobs.

    ``sampling_scale`` multiplies the declared merit ladder before outcomes
    are drawn, emulating comparisons whose score noise swamps part of the
    merit signal. All statistics (coverage targets, errors, deviation checks)
    are assessed against the damped ladder actually sampled. The bundled
    reference grids are calibrated at 0.25; 1.0 means the ladder is sampled
    as declared.
    """

    n: int
    comparisons_per_pair: int
    p_rule: float | str
    c: float
    replications: int
    master_seed: int
    pairs: tuple[tuple[int, int], ...] = ()
    link_name: str = "probit"
    sampling_scale: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise DataValidationError(f"cell needs n >= 2, got {self.n}")
        if self.replications < 1:
            raise DataValidationError("replication count must be positive")
        if not math.isfinite(self.sampling_scale) or self.sampling_scale < 0:
            raise DataValidationError(
                f"sampling_scale must be finite and >= 0, got {self.sampling_scale}"
            )
        resolve_pair_probability(self.n, self.p_rule)  # fail fast on bad rules
        for i, j in self.pairs:
            if not (0 <= i <= self.n and 0 <= j <= self.n and i != j):
                raise DataValidationError(f"pair ({i}, {j}) invalid for n={self.n}")

    @property
    def pair_probability(self) -> float:
        return resolve_pair_probability(self.n, self.p_rule)

    @property
    def sampled_merits(self) -> np.ndarray:
        return linear_merits(self.n + 1, self.c) * self.sampling_scale


@dataclass(frozen=True)
class PairStat:
    i: int
    j: int
    successes: int
    covered: int
    coverage: float
    mean_length: float


@dataclass(frozen=True)
class ErrorSummary:
    median: float
    mean: float
    max: float


@dataclass(frozen=True)
class SimulationReport:
    study: str
    cell: SimulationCell
    pair_probability: float
    level: float | None = None
    connectivity_fail_rate: float | None = None
    fit_fail_rate: float | None = None
    pair_stats: tuple[PairStat, ...] = ()
    error_summary: ErrorSummary | None = None
    deviation_fraction: float | None = None

    def to_record(self) -> dict:
        rec = {
            "study": self.study,
            "n": self.cell.n,
            "comparisons_per_pair": self.cell.comparisons_per_pair,
            "p_rule": str(self.cell.p_rule),
            "pair_probability": self.pair_probability,
            "c": self.cell.c,
            "link": self.cell.link_name,
            "sampling_scale": self.cell.sampling_scale,
            "replications": self.cell.replications,
            "master_seed": self.cell.master_seed,
            "level": self.level,
            "connectivity_fail_rate": self.connectivity_fail_rate,
            "fit_fail_rate": self.fit_fail_rate,
            "pairs": [
                {
                    "i": s.i,
                    "j": s.j,
                    "successes": s.successes,
                    "covered": s.covered,
                    "coverage": s.coverage,
                    "mean_length": s.mean_length,
                }
                for s in self.pair_stats
            ],
        }
        if self.error_summary is not None:
            rec["sup_error"] = {
                "median": self.error_summary.median,
                "mean": self.error_summary.mean,
                "max": self.error_summary.max,
            }
        if self.deviation_fraction is not None:
            rec["deviation_fraction"] = self.deviation_fraction
        return rec


def _map_replications(fn: Callable[[int], object], replications: int, workers: int) -> list:
    if workers <= 1:
        return [fn(r) for r in range(replications)]
    chunk = max(1, replications // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replications), chunksize=chunk))


def _connectivity_rep(cell: SimulationCell, replication: int) -> bool:
    rng = replication_rng(cell.master_seed, replication)
    t = sample_er_graph(
        cell.n + 1, cell.comparisons_per_pair, cell.pair_probability, rng
    )
    data = sample_outcomes(t, cell.sampled_merits, get_link(cell.link_name), rng)
    return not is_strongly_connected(data.a)


def run_connectivity_study(cell: SimulationCell, workers: int = 1) -> SimulationReport:
    """Fraction of replications whose win digraph is not strongly connected."""
    fails = _map_replications(
        partial(_connectivity_rep, cell), cell.replications, workers
    )
    return SimulationReport(
        study="connectivity",
        cell=cell,
        pair_probability=cell.pair_probability,
        connectivity_fail_rate=sum(fails) / cell.replications,
    )


def _coverage_rep(cell: SimulationCell, level: float, replication: int):
    """One replication: (failed, per-pair (covered, length), sup error, deviated)."""
    rng = replication_rng(cell.master_seed, replication)
    link = get_link(cell.link_name)
    t = sample_er_graph(
        cell.n + 1, cell.comparisons_per_pair, cell.pair_probability, rng
    )
    merits = cell.sampled_merits
    data = sample_outcomes(t, merits, link, rng)

    expected = (t * np.asarray(link.cdf(merits[:, None] - merits[None, :]))).sum(axis=1)
    deviation = float(np.max(np.abs(data.scores - expected)))
    threshold = math.sqrt(2.0 * float(data.totals.max()) * math.log(cell.n))
    deviated = deviation > threshold

    if not is_strongly_connected(data.a):
        return True, None, None, deviated
    system = MomentSystem(data=data, link=link)
    try:
        result = fit(system, FitConfig())
    except FitError:
        return True, None, None, deviated
    report = covariance_report(system, result.merits)
    per_pair = []
    for i, j in cell.pairs:
        ci = confidence_interval(report, i, j, level)
        per_pair.append((ci.covers(float(merits[i] - merits[j])), ci.width))
    sup_error = float(np.max(np.abs(result.merits - merits)))
    return False, per_pair, sup_error, deviated


def run_coverage_study(
    cell: SimulationCell, level: float = 0.95, workers: int = 1
) -> SimulationReport:
    """Coverage and length of pairwise intervals, with fit failures counted apart.

    A replication fails when its win digraph is not strongly connected (no
    root exists) or when the solver raises (disconnected graph, Newton
    divergence, a singular factorization); coverage and length aggregate over
    the successful replications only.
    """
    rows = _map_replications(
        partial(_coverage_rep, cell, level), cell.replications, workers
    )
    failures = sum(1 for failed, _, _, _ in rows if failed)
    deviations = sum(1 for _, _, _, deviated in rows if deviated)
    successes = cell.replications - failures
    pair_stats = []
    for k, (i, j) in enumerate(cell.pairs):
        covered = sum(1 for failed, pp, _, _ in rows if not failed and pp[k][0])
        lengths = [pp[k][1] for failed, pp, _, _ in rows if not failed]
        pair_stats.append(
            PairStat(
                i=i,
                j=j,
                successes=successes,
                covered=covered,
                coverage=covered / successes if successes else math.nan,
                mean_length=math.fsum(lengths) / successes if successes else math.nan,
            )
        )
    errors = [err for failed, _, err, _ in rows if not failed]
    summary = (
        ErrorSummary(
            median=float(median(errors)),
            mean=math.fsum(errors) / len(errors),
            max=max(errors),
        )
        if errors
        else None
    )
    return SimulationReport(
        study="coverage",
        cell=cell,
        pair_probability=cell.pair_probability,
        level=level,
        fit_fail_rate=failures / cell.replications,
        pair_stats=tuple(pair_stats),
        error_summary=summary,
        deviation_fraction=deviations / cell.replications,
    )


def run_consistency_study(
    n_list: Sequence[int],
    p_rule: float | str,
    c: float,
    replications: int,
    master_seed: int,
    comparisons_per_pair: int = 1,
    link_name: str = "probit",
    sampling_scale: float = 1.0,
    workers: int = 1,
) -> list[SimulationReport]:
    """Sup-norm error summaries across increasing n under one sparsity rule."""
    if list(n_list) != sorted(set(n_list)):
        raise DataValidationError("n_list must be strictly increasing")
    reports = []
    for n in n_list:
        cell = SimulationCell(
            n=n,
            comparisons_per_pair=comparisons_per_pair,
            p_rule=p_rule,
            c=c,
            replications=replications,
            master_seed=master_seed,
            link_name=link_name,
            sampling_scale=sampling_scale,
        )
        report = run_coverage_study(cell, workers=workers)
        reports.append(replace(report, study="consistency"))
    return reports


# ---------------------------------------------------------------------------
# Bundled study grids and text rendering


# Damping applied by the bundled grids; see SimulationCell.sampling_scale.
GRID_SAMPLING_SCALE = 0.25


def connectivity_grid(
    replications: int = 1000, master_seed: int = 20180906, sizes: Sequence[int] = (100, 500, 1000)
) -> list[SimulationCell]:
    """3 x len(sizes) grid of sparsity rules against n, all at c = 0.4, T = 1."""
    rules = ["(log n/n)^(1/2)", "(log n/n)^(2/3)", "log n/n"]
    return [
        SimulationCell(
            n=n,
            comparisons_per_pair=1,
            p_rule=rule,
            c=0.4,
            replications=replications,
            master_seed=master_seed,
            sampling_scale=GRID_SAMPLING_SCALE,
        )
        for rule in rules
        for n in sizes
    ]


def coverage_grid(
    replications: int = 2000, master_seed: int = 20180906, sizes: Sequence[int] = (100, 200)
) -> list[SimulationCell]:
    """Coverage cells over two sparsity rules, three merit slopes, three pairs."""
    blocks = [("(log n/n)^(1/4)", (0.2, 0.5, 0.8)), ("(log n/n)^(1/2)", (0.2, 0.4, 0.6))]
    cells = []
    for rule, slopes in blocks:
        for n in sizes:
            pairs = ((1, 2), (n // 2 - 1, n // 2), (n - 1, n))
            for c in slopes:
                cells.append(
                    SimulationCell(
                        n=n,
                        comparisons_per_pair=1,
                        p_rule=rule,
                        c=c,
                        replications=replications,
                        master_seed=master_seed,
                        pairs=pairs,
                        sampling_scale=GRID_SAMPLING_SCALE,
                    )
                )
    return cells


def format_connectivity_table(reports: Iterable[SimulationReport]) -> str:
    """Aligned grid: one row per sparsity rule, one column per n, fail % cells."""
    reports = list(reports)
    rules = list(dict.fromkeys(str(r.cell.p_rule) for r in reports))
    sizes = sorted({r.cell.n for r in reports})
    width = max(12, *(len(rule) for rule in rules)) + 2
    lines = ["fail frequency of strong connectivity (%)"]
    header = " " * width + "".join(f"n={n:<10}" for n in sizes)
    lines.append(header)
    for rule in rules:
        cells = []
        for n in sizes:
            match = [
                r for r in reports if str(r.cell.p_rule) == rule and r.cell.n == n
            ]
            cells.append(
                f"{100 * match[0].connectivity_fail_rate:<12.1f}" if match else " " * 12
            )
        lines.append(f"{rule:<{width}}" + "".join(cells))
    return "\n".join(lines)


def format_coverage_table(reports: Iterable[SimulationReport]) -> str:
    """Blocks per sparsity rule: rows (n, pair), columns c, cells cov/len/fail%."""
    reports = list(reports)
    rules = list(dict.fromkeys(str(r.cell.p_rule) for r in reports))
    lines = ["coverage (%) / mean CI length / fit-fail (%)"]
    for rule in rules:
        block = [r for r in reports if str(r.cell.p_rule) == rule]
        slopes = sorted({r.cell.c for r in block})
        lines.append(f"\np = {rule}")
        lines.append(f"{'n':>6} {'pair':>12}" + "".join(f"{'c=' + str(c):>24}" for c in slopes))
        for n in sorted({r.cell.n for r in block}):
            for_pairs = [r for r in block if r.cell.n == n]
            if not for_pairs:
                continue
            pair_list = for_pairs[0].cell.pairs
            for k, (i, j) in enumerate(pair_list):
                cells = []
                for c in slopes:
                    match = [r for r in for_pairs if r.cell.c == c]
                    if match and len(match[0].pair_stats) > k:
                        s = match[0].pair_stats[k]
                        cells.append(
                            f"{100 * s.coverage:6.2f} /{s.mean_length:5.2f} /"
                            f"{100 * match[0].fit_fail_rate:5.2f}"
                        )
                    else:
                        cells.append(" " * 24)
                lines.append(f"{n:>6} {f'({i},{j})':>12}" + "".join(f"{cell:>24}" for cell in cells))
    return "\n".join(lines)
