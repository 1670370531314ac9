"""Games-file ingestion: per-game rows aggregated into comparison matrices.

The file format is CSV with a required header. Recognized headers are
"winner,loser" plus optional "count" and "result" columns in that order.
Each row records `count` identical games (default 1). A row whose result
column says "tie" is a drawn pairing; the winner/loser columns then just
name the two subjects. Everything else must say "win".
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import ComparisonData
from .errors import IngestError

TIE_POLICIES = ("drop", "half")
FEWEST_WINS = "fewest-wins"

_HEADERS = (
    ("winner", "loser"),
    ("winner", "loser", "count"),
    ("winner", "loser", "result"),
    ("winner", "loser", "count", "result"),
)


@dataclass(frozen=True)
class GameRecord:
    """One aggregated row of the games file."""

    winner: str
    loser: str
    count: int = 1
    tie: bool = False
    line: int | None = None

    def __post_init__(self):
        if not self.winner or not self.loser:
            raise IngestError("subject labels must be nonempty", self.line)
        if self.winner == self.loser:
            raise IngestError(
                f"subject {self.winner!r} cannot play itself", self.line
            )
        if self.count < 1:
            raise IngestError(f"count must be positive, got {self.count}", self.line)


def _parse_count(text: str, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise IngestError(f"count must be an integer, got {text!r}", line) from None
    return value


def parse_games(lines: Iterable[str]) -> list[GameRecord]:
    """Parse games rows, reporting the 1-based line of any malformed row."""
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty file: expected a header row") from None
    columns = tuple(c.strip().lower() for c in header)
    if columns not in _HEADERS:
        raise IngestError(
            f"unrecognized header {','.join(header)!r}; expected winner,loser"
            "[,count][,result]",
            line=1,
        )
    has_count = "count" in columns
    has_result = "result" in columns
    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not field.strip() for field in row):
            continue
        if len(row) != len(columns):
            raise IngestError(
                f"expected {len(columns)} fields, got {len(row)}", line
            )
        fields = [f.strip() for f in row]
        winner, loser = fields[0], fields[1]
        count = _parse_count(fields[2], line) if has_count else 1
        tie = False
        if has_result:
            result = fields[-1].lower()
            if result not in ("win", "tie"):
                raise IngestError(f"result must be 'win' or 'tie', got {fields[-1]!r}", line)
            tie = result == "tie"
        records.append(GameRecord(winner, loser, count, tie, line))
    return records


def aggregate(
    records: Sequence[GameRecord],
    tie_policy: str = "drop",
    baseline: str = FEWEST_WINS,
    subject_order: Sequence[str] | None = None,
) -> ComparisonData:
    """Fold game records into labeled t and a matrices.

    tie_policy "drop" discards drawn pairings; "half" books a tie as one
    win each (two comparisons). The baseline subject lands at index 0:
    either the given label, or under "fewest-wins" the subject with the
    smallest win total (label order breaking ties). Remaining subjects are
    sorted by label. An explicit subject_order overrides all of that and
    must list every observed label exactly once, baseline first.
    """
    if tie_policy not in TIE_POLICIES:
        raise IngestError(
            f"unknown tie policy {tie_policy!r}; expected one of {TIE_POLICIES}"
        )
    observed: dict[str, None] = {}
    for record in records:
        observed.setdefault(record.winner)
        observed.setdefault(record.loser)
    if len(observed) < 2:
        raise IngestError(f"need at least 2 subjects, found {len(observed)}")

    wins: dict[str, int] = dict.fromkeys(observed, 0)
    kept: list[GameRecord] = []
    for record in records:
        if record.tie and tie_policy == "drop":
            continue
        kept.append(record)
        if not record.tie:
            wins[record.winner] += record.count

    if subject_order is not None:
        order = list(subject_order)
        if sorted(order) != sorted(observed):
            raise IngestError(
                "subject_order must list every observed label exactly once"
            )
    else:
        if baseline == FEWEST_WINS:
            first = min(observed, key=lambda label: (wins[label], label))
        else:
            if baseline not in observed:
                raise IngestError(f"baseline label {baseline!r} not in the data")
            first = baseline
        order = [first] + sorted(label for label in observed if label != first)

    index = {label: i for i, label in enumerate(order)}
    size = len(order)
    t = np.zeros((size, size), dtype=np.int64)
    a = np.zeros((size, size), dtype=np.int64)
    for record in kept:
        i, j = index[record.winner], index[record.loser]
        if record.tie:
            t[i, j] += 2 * record.count
            t[j, i] += 2 * record.count
            a[i, j] += record.count
            a[j, i] += record.count
        else:
            t[i, j] += record.count
            t[j, i] += record.count
            a[i, j] += record.count
    return ComparisonData(t=t, a=a, labels=tuple(order))


def ingest_text(
    text: str,
    tie_policy: str = "drop",
    baseline: str = FEWEST_WINS,
    subject_order: Sequence[str] | None = None,
) -> ComparisonData:
    return aggregate(parse_games(io.StringIO(text)), tie_policy, baseline, subject_order)


def ingest(
    path: str | Path,
    tie_policy: str = "drop",
    baseline: str = FEWEST_WINS,
    subject_order: Sequence[str] | None = None,
) -> ComparisonData:
    with open(path, newline="", encoding="utf-8") as handle:
        records = parse_games(handle)
    return aggregate(records, tie_policy, baseline, subject_order)


def export_games(data: ComparisonData, path: str | Path | None = None) -> str:
    """Serialize win counts back to the games format.

    Rows are one per directed pair with a_ij > 0, in index order, so
    re-ingesting with subject_order=data.labels reproduces t and a exactly.
    Returns the CSV text; writes it to path when given.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["winner", "loser", "count", "result"])
    for i in range(data.n_plus_1):
        for j in range(data.n_plus_1):
            if data.a[i, j]:
                writer.writerow(
                    [data.label_of(i), data.label_of(j), int(data.a[i, j]), "win"]
                )
    text = buffer.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_grouping(lines: Iterable[str]) -> dict[str, tuple[str, str]]:
    """Parse label,conference,division rows into a grouping map."""
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty grouping file") from None
    columns = tuple(c.strip().lower() for c in header)
    if columns != ("label", "conference", "division"):
        raise IngestError(f"unrecognized grouping header {','.join(header)!r}", line=1)
    grouping: dict[str, tuple[str, str]] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not field.strip() for field in row):
            continue
        if len(row) != 3:
            raise IngestError(f"expected 3 fields, got {len(row)}", line)
        label, conference, division = (f.strip() for f in row)
        if not label or not conference or not division:
            raise IngestError("grouping fields must be nonempty", line)
        if label in grouping:
            raise IngestError(f"duplicate grouping label {label!r}", line)
        grouping[label] = (conference, division)
    if not grouping:
        raise IngestError("grouping file has no rows")
    return grouping


def grouping_from_text(text: str) -> dict[str, tuple[str, str]]:
    return parse_grouping(io.StringIO(text))


def read_grouping(source: str | Path) -> dict[str, tuple[str, str]]:
    with open(source, newline="", encoding="utf-8") as handle:
        return parse_grouping(handle)
