"""Bundled datasets.

nfl2018_games.csv holds the 2018 regular season in the games format: 256
rows, two of them ties (Steelers-Browns and Packers-Vikings). The file
reproduces the season as analyzed in the reference ranking table, which
credits Jacksonville's win over the Jets to the Giants; see the tests for
the structural consequences. nfl2018_teams.csv is the matching grouping
file (label, conference, division).
"""

from __future__ import annotations

from pathlib import Path

_HERE = Path(__file__).resolve().parent

NFL2018 = "nfl2018"


def nfl2018_games_path() -> Path:
    return _HERE / "nfl2018_games.csv"


def nfl2018_teams_path() -> Path:
    return _HERE / "nfl2018_teams.csv"


def resolve_games_source(source: str | Path) -> Path:
    """Map the bundled-dataset sentinel to its file, pass paths through."""
    if str(source) == NFL2018:
        return nfl2018_games_path()
    return Path(source)


def resolve_grouping_source(source: str | Path) -> Path:
    if str(source) == NFL2018:
        return nfl2018_teams_path()
    return Path(source)
