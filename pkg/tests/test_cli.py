"""Command line behavior: output tables, exit codes, remote mode."""

import json

import httpx
import pytest

from pairrank.cli import EXIT_FIT, EXIT_INPUT, EXIT_OK, run

GAMES = "winner,loser,count\nA,B,3\nB,A,1\nB,C,2\nC,A,1\nA,C,1\n"
GROUPING = (
    "label,conference,division\n"
    "A,East,North\nB,East,South\nC,East,North\n"
)


@pytest.fixture
def games_file(tmp_path):
    path = tmp_path / "games.csv"
    path.write_text(GAMES, encoding="utf-8")
    return str(path)


def test_ingest_prints_summary_and_writes_export(games_file, tmp_path, capsys):
    out = tmp_path / "canonical.csv"
    assert run(["ingest", games_file, "--output", str(out)]) == EXIT_OK
    shown = capsys.readouterr().out
    assert "3 subjects, baseline C" in shown
    assert "comparisons per subject in [" in shown
    assert out.read_text().startswith("winner,loser,count,result")


def test_ingest_bundled_season(capsys):
    assert run(["ingest", "nfl2018"]) == EXIT_OK
    shown = capsys.readouterr().out
    assert "32 subjects, baseline Arizona Cardinals" in shown
    assert "min common neighbors 2" in shown


def test_fit_table_and_json_output(games_file, tmp_path, capsys):
    out = tmp_path / "fit.json"
    assert run(["fit", games_file, "--output", str(out)]) == EXIT_OK
    shown = capsys.readouterr().out
    lines = shown.splitlines()
    assert lines[0].split() == ["rank", "subject", "merit", "wins", "se"]
    assert lines[1].startswith("   1  A")
    assert "baseline: C (merit 0, link probit)" in shown
    assert "solver: converged" in shown
    assert "newton certificate: h =" in shown
    report = json.loads(out.read_text())
    assert report["baseline"] == "C"
    assert [e["rank"] for e in report["entries"]] == [1, 2, 3]
    # table rounds to 3 decimals, the JSON keeps full precision
    assert abs(report["entries"][0]["merit"]) > 0
    assert len(str(report["entries"][0]["merit"])) > 6


def test_fit_marks_exact_ties(tmp_path, capsys):
    path = tmp_path / "tied.csv"
    path.write_text("winner,loser\nA,B\nB,A\n", encoding="utf-8")
    assert run(["fit", str(path)]) == EXIT_OK
    shown = capsys.readouterr().out
    assert "* merit exactly tied with a neighbor" in shown


def test_fit_exit_code_on_disconnected_graph(tmp_path, capsys):
    path = tmp_path / "split.csv"
    path.write_text("winner,loser\nA,B\nC,D\n", encoding="utf-8")
    assert run(["fit", str(path)]) == EXIT_FIT
    assert "disconnected" in capsys.readouterr().err


def test_exit_code_on_malformed_rows(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("winner,loser\nA,A\n", encoding="utf-8")
    assert run(["fit", str(path)]) == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err


def test_exit_code_on_missing_file(capsys):
    assert run(["fit", "/no/such/file.csv"]) == EXIT_INPUT
    assert "not found" in capsys.readouterr().err


def test_seeds_bundled_season_merit_rule(capsys):
    assert run(
        ["seeds", "nfl2018", "--grouping", "nfl2018", "--rule", "merit"]
    ) == EXIT_OK
    shown = capsys.readouterr().out
    assert "seeding rule: merit" in shown
    afc = shown.index("AFC:")
    nfc = shown.index("NFC:")
    assert shown.index("1. Kansas City Chiefs") > afc
    assert shown.index("6. Pittsburgh Steelers") < nfc
    assert shown.index("1. Los Angeles Rams") > nfc
    assert "6. Philadelphia Eagles" in shown


def test_seeds_with_local_grouping(games_file, tmp_path, capsys):
    path = tmp_path / "grouping.csv"
    path.write_text(GROUPING, encoding="utf-8")
    assert run(["seeds", games_file, "--grouping", str(path)]) == EXIT_OK
    shown = capsys.readouterr().out
    assert "East:" in shown
    assert "1. A" in shown


def test_simulate_single_cell_prints_json(capsys):
    assert run(
        [
            "simulate", "--study", "connectivity", "--n", "12",
            "--p-rule", "1.0", "--c", "0.0", "--replications", "10",
            "--comparisons-per-pair", "3", "--seed", "4",
        ]
    ) == EXIT_OK
    records = json.loads(capsys.readouterr().out)
    assert records[0]["connectivity_fail_rate"] == 0.0


def test_simulate_pairs_argument(capsys):
    assert run(
        [
            "simulate", "--study", "coverage", "--n", "10",
            "--p-rule", "0.9", "--c", "0.3", "--replications", "5",
            "--pairs", "1,2;9,10", "-T", "2", "--seed", "6",
        ]
    ) == EXIT_OK
    records = json.loads(capsys.readouterr().out)
    pairs = [(p["i"], p["j"]) for p in records[0]["pairs"]]
    assert pairs == [(1, 2), (9, 10)]


def test_simulate_input_validation(capsys):
    assert run(["simulate", "--study", "coverage", "--n", "10", "--p-rule", "soon"]) == EXIT_INPUT
    assert "cannot parse" in capsys.readouterr().err
    assert run(["simulate", "--study", "coverage"]) == EXIT_INPUT
    assert "needs n" in capsys.readouterr().err
    assert run(
        ["simulate", "--study", "coverage", "--n", "10", "--replications", "0"]
    ) == EXIT_INPUT
    capsys.readouterr()
    assert run(["simulate"]) == EXIT_INPUT
    assert "--study or --preset" in capsys.readouterr().err


def test_simulate_output_is_deterministic(tmp_path):
    args = [
        "simulate", "--study", "coverage", "--n", "10",
        "--p-rule", "0.9", "--c", "0.3", "--replications", "8",
        "--pairs", "1,2", "--seed", "3",
    ]
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert run(args + ["--output", str(first)]) == EXIT_OK
    assert run(args + ["--workers", "2", "--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_preset_grid_with_reduced_replications(tmp_path, capsys):
    out = tmp_path / "grid.json"
    assert run(
        ["simulate", "--preset", "table1", "--replications", "2", "--output", str(out)]
    ) == EXIT_OK
    shown = capsys.readouterr().out
    assert "fail frequency of strong connectivity" in shown
    assert "n=100" in shown and "n=1000" in shown
    assert "log n/n" in shown
    assert "note: 2 replications per cell (reference 1000)" in shown
    records = json.loads(out.read_text())
    assert len(records) == 9
    assert all(r["sampling_scale"] == 0.25 for r in records)


def test_invalid_choice_exits_via_argparse(capsys):
    with pytest.raises(SystemExit) as info:
        run(["fit", "nfl2018", "--link", "cauchy"])
    assert info.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        run(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip()


class _Reply:
    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload
        self.text = json.dumps(payload)

    def json(self):
        return self._payload


def test_server_mode_posts_the_request(monkeypatch, games_file, capsys):
    seen = {}

    def fake_post(url, json=None, timeout=None):
        seen["url"] = url
        seen["body"] = json
        return _Reply(
            200,
            {
                "n_subjects": 3,
                "baseline": "C",
                "subjects": [{"label": "C", "wins": 1.0, "games": 4}],
                "diagnostics": {
                    "t_graph_connected": True,
                    "win_digraph_strongly_connected": True,
                    "t_min": 4,
                    "t_max": 6,
                    "min_common_neighbors": 1,
                    "tau": 1 / 3,
                },
                "canonical_csv": "winner,loser,count,result\n",
            },
        )

    monkeypatch.setattr(httpx, "post", fake_post)
    assert run(["--server", "http://ranker:9/", "ingest", games_file]) == EXIT_OK
    assert seen["url"] == "http://ranker:9/ingest"
    assert seen["body"]["csv_text"] == GAMES
    assert "3 subjects, baseline C" in capsys.readouterr().out


def test_server_error_statuses_map_to_exit_codes(monkeypatch, games_file, capsys):
    monkeypatch.setattr(
        httpx, "post", lambda *a, **k: _Reply(409, {"detail": "no convergence"})
    )
    assert run(["--server", "http://x", "fit", games_file]) == EXIT_FIT
    assert "no convergence" in capsys.readouterr().err

    monkeypatch.setattr(
        httpx, "post", lambda *a, **k: _Reply(400, {"detail": "line 2: bad row"})
    )
    assert run(["--server", "http://x", "fit", games_file]) == EXIT_INPUT
    assert "server rejected request: line 2: bad row" in capsys.readouterr().err


def test_unreachable_server_is_an_input_error(games_file, capsys):
    assert run(
        ["--server", "http://127.0.0.1:1", "ingest", games_file]
    ) == EXIT_INPUT
    assert "cannot reach server" in capsys.readouterr().err
