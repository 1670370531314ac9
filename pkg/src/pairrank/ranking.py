"""Rank tables and playoff-style seed selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .data import ComparisonData
from .errors import DataValidationError
from .estimator import FitResult
from .inference import CovarianceReport

SEED_RULES = ("pct", "merit")


@dataclass(frozen=True)
class RankEntry:
    label: str
    merit: float
    wins: int
    games: int
    standard_error: float
    tied: bool

    @property
    def pct(self) -> float:
        """Won-lost percentage over the games actually booked."""
        return self.wins / self.games if self.games else 0.0


@dataclass(frozen=True)
class RankReport:
    """Per-subject fit summary ordered by merit, best first.

    Exact merit ties are flagged on every entry involved; the order within
    a tied run falls back to label so output is stable.
    """

    entries: tuple[RankEntry, ...]
    baseline_label: str

    def entry(self, label: str) -> RankEntry:
        for entry in self.entries:
            if entry.label == label:
                return entry
        raise DataValidationError(f"no ranked subject {label!r}")


def rank_report(
    data: ComparisonData, result: FitResult, covariance: CovarianceReport
) -> RankReport:
    merits = result.merits
    errors = np.sqrt(covariance.variance_diag)
    order = sorted(
        range(data.n_plus_1), key=lambda i: (-merits[i], data.label_of(i))
    )
    entries = []
    for position, i in enumerate(order):
        tied = bool(
            (position > 0 and merits[order[position - 1]] == merits[i])
            or (position + 1 < len(order) and merits[order[position + 1]] == merits[i])
        )
        entries.append(
            RankEntry(
                label=data.label_of(i),
                merit=float(merits[i]),
                wins=int(data.scores[i]),
                games=int(data.totals[i]),
                standard_error=float(errors[i]),
                tied=tied,
            )
        )
    return RankReport(entries=tuple(entries), baseline_label=data.label_of(0))


def _seed_key(entry: RankEntry, rule: str):
    value = entry.pct if rule == "pct" else entry.merit
    return (-value, entry.label)


def seed_selection(
    report: RankReport,
    grouping: Mapping[str, tuple[str, str]],
    rule: str,
) -> dict[str, tuple[str, ...]]:
    """Six seeds per conference: division winners by rank, then two wildcards.

    rule "pct" ranks by won-lost percentage, "merit" by fitted merit;
    either way exact ties fall back to label order, so the selection is
    deterministic. Each subject needs a (conference, division) assignment.
    """
    if rule not in SEED_RULES:
        raise DataValidationError(f"unknown seed rule {rule!r}; expected pct or merit")
    missing = [e.label for e in report.entries if e.label not in grouping]
    if missing:
        raise DataValidationError(
            f"grouping is missing {len(missing)} subject(s), e.g. {missing[0]!r}"
        )
    conferences: dict[str, dict[str, list[RankEntry]]] = {}
    for entry in report.entries:
        conference, division = grouping[entry.label]
        conferences.setdefault(conference, {}).setdefault(division, []).append(entry)

    seeds: dict[str, tuple[str, ...]] = {}
    for conference in sorted(conferences):
        divisions = conferences[conference]
        winners = []
        others = []
        for division in divisions.values():
            ranked = sorted(division, key=lambda e: _seed_key(e, rule))
            winners.append(ranked[0])
            others.extend(ranked[1:])
        winners.sort(key=lambda e: _seed_key(e, rule))
        others.sort(key=lambda e: _seed_key(e, rule))
        selected = winners + others[:2]
        seeds[conference] = tuple(entry.label for entry in selected)
    return seeds
