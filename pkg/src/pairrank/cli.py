"""Command line front end.

Subcommands cover the whole workflow: ingest a games file, fit and rank,
pick playoff seeds, run Monte Carlo studies, and serve the HTTP API. Every
data command builds the same request models the service accepts and runs
them in process by default; --server re-points execution at a running
instance without changing any output.

Exit codes: 0 success, 2 bad input, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import BaseModel, ValidationError

from . import __version__, datasets
from .errors import FitError, PairRankError
from .links import available_links
from .service import schemas
from .service.app import handle_fit, handle_ingest, handle_seeds, handle_simulate
from .simulate import (
    connectivity_grid,
    coverage_grid,
    format_connectivity_table,
    format_coverage_table,
    run_connectivity_study,
    run_coverage_study,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3

# Reference replication counts of the bundled grids; running a preset below
# these triggers the Monte Carlo noise note.
PRESET_REPLICATIONS = {"table1": 1000, "table2": 2000}

_HANDLERS = {
    "/ingest": (handle_ingest, schemas.IngestResponse),
    "/fit": (handle_fit, schemas.FitResponse),
    "/seeds": (handle_seeds, schemas.SeedsResponse),
    "/simulate": (handle_simulate, schemas.SimulateResponse),
}


def _call(server: str | None, path: str, request: BaseModel) -> BaseModel:
    handler, response_type = _HANDLERS[path]
    if server is None:
        return handler(request)
    import httpx

    try:
        reply = httpx.post(
            server.rstrip("/") + path,
            json=request.model_dump(mode="json"),
            timeout=None,
        )
    except httpx.HTTPError as exc:
        raise PairRankError(f"cannot reach server {server}: {exc}") from exc
    if reply.status_code == 409:
        raise FitError(reply.json().get("detail", reply.text))
    if reply.status_code >= 400:
        detail = reply.json().get("detail", reply.text)
        raise PairRankError(f"server rejected request: {detail}")
    return response_type.model_validate(reply.json())


def _dataset_spec(args) -> schemas.DatasetSpec:
    fields = dict(
        tie_policy=args.tie_policy,
        baseline=args.baseline,
    )
    if args.games == datasets.NFL2018:
        return schemas.DatasetSpec(bundled=args.games, **fields)
    path = Path(args.games)
    if not path.is_file():
        raise PairRankError(f"games file not found: {path}")
    return schemas.DatasetSpec(csv_text=path.read_text(encoding="utf-8"), **fields)


def _grouping_spec(source: str) -> schemas.GroupingSpec:
    if source == datasets.NFL2018:
        return schemas.GroupingSpec(bundled=source)
    path = Path(source)
    if not path.is_file():
        raise PairRankError(f"grouping file not found: {path}")
    return schemas.GroupingSpec(csv_text=path.read_text(encoding="utf-8"))


def _write_output(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _format_wins(wins: float) -> str:
    return f"{wins:g}"


def _diagnostics_lines(d: schemas.GraphInfo) -> list[str]:
    yn = {True: "yes", False: "no"}
    return [
        f"graph: t-graph connected {yn[d.t_graph_connected]}; "
        f"win digraph strongly connected {yn[d.win_digraph_strongly_connected]}; "
        f"comparisons per subject in [{d.t_min}, {d.t_max}]; "
        f"min common neighbors {d.min_common_neighbors}; tau = {d.tau:.6g}"
    ]


def cmd_ingest(args) -> int:
    response = _call(args.server, "/ingest", _dataset_spec(args))
    print(f"{response.n_subjects} subjects, baseline {response.baseline}")
    for line in _diagnostics_lines(response.diagnostics):
        print(line)
    width = max(len(s.label) for s in response.subjects)
    for s in response.subjects:
        print(f"  {s.label:<{width}}  wins {_format_wins(s.wins):>4}  games {s.games}")
    _write_output(args.output, response.canonical_csv)
    return EXIT_OK


def cmd_fit(args) -> int:
    request = schemas.FitRequest(
        dataset=_dataset_spec(args),
        link=args.link,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        kantorovich_radius=args.kantorovich_radius,
    )
    response = _call(args.server, "/fit", request)
    width = max(len(e.label) for e in response.entries)
    print(f"{'rank':>4}  {'subject':<{width}}  {'merit':>7}  {'wins':>4}  {'se':>6}")
    any_tied = False
    for e in response.entries:
        mark = "*" if e.tied else " "
        any_tied = any_tied or e.tied
        print(
            f"{e.rank:>4}  {e.label:<{width}}  {e.merit:>7.3f}{mark} "
            f"{_format_wins(e.wins):>4}  {e.standard_error:>6.3f}"
        )
    if any_tied:
        print("* merit exactly tied with a neighbor")
    print(f"baseline: {response.baseline} (merit 0, link {response.link})")
    for line in _diagnostics_lines(response.diagnostics):
        print(line)
    s = response.solver
    print(
        f"solver: {'converged' if s.converged else 'NOT converged'} "
        f"in {s.iterations} iterations; max residual {s.residual_inf_norm:.3e}"
    )
    k = response.kantorovich
    verdict = "certified" if k.certified else "NOT certified"
    print(
        f"newton certificate: h = {k.h:.3g} "
        f"{'<=' if k.h <= 0.5 else '>'} 1/2 "
        f"(radius {args.kantorovich_radius:g}): {verdict}"
    )
    _write_output(args.output, response.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def cmd_seeds(args) -> int:
    request = schemas.SeedsRequest(
        dataset=_dataset_spec(args),
        grouping=_grouping_spec(args.grouping),
        rule=args.rule,
        link=args.link,
    )
    response = _call(args.server, "/seeds", request)
    print(f"seeding rule: {response.rule}")
    for conference, teams in response.conferences.items():
        print(f"{conference}:")
        for seed, team in enumerate(teams, start=1):
            print(f"  {seed}. {team}")
    _write_output(args.output, response.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def _run_preset(args) -> int:
    reference = PRESET_REPLICATIONS[args.preset]
    replications = args.replications if args.replications is not None else reference
    if args.preset == "table1":
        cells = connectivity_grid(replications=replications, master_seed=args.seed)
        reports = [run_connectivity_study(cell, workers=args.workers) for cell in cells]
        table = format_connectivity_table(reports)
    else:
        cells = coverage_grid(replications=replications, master_seed=args.seed)
        reports = [run_coverage_study(cell, workers=args.workers) for cell in cells]
        table = format_coverage_table(reports)
    print(table)
    if replications < reference:
        # rough 95% half-width on a coverage/fail percentage near 0.95
        noise = 196.0 * (0.95 * 0.05 / replications) ** 0.5
        print(
            f"note: {replications} replications per cell (reference {reference}); "
            f"Monte Carlo noise about +/-{noise:.1f} pp on the percentages"
        )
    _write_output(
        args.output,
        json.dumps([r.to_record() for r in reports], indent=2) + "\n",
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.preset:
        return _run_preset(args)
    if not args.study:
        raise PairRankError("simulate needs --study or --preset")
    request = schemas.SimulateRequest(
        study=args.study,
        n=args.n,
        n_list=args.n_list,
        comparisons_per_pair=args.comparisons_per_pair,
        p_rule=args.p_rule,
        c=args.c,
        replications=args.replications if args.replications is not None else 100,
        master_seed=args.seed,
        pairs=args.pairs or [],
        level=args.level,
        link=args.link,
        sampling_scale=args.sampling_scale,
        workers=args.workers,
    )
    response = _call(args.server, "/simulate", request)
    text = json.dumps(response.reports, indent=2)
    print(text)
    _write_output(args.output, text + "\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("pairrank.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"bad pair {chunk!r}, expected i,j")
        pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def _add_dataset_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "games",
        help=f"games CSV path, or '{datasets.NFL2018}' for the bundled season",
    )
    parser.add_argument("--tie-policy", choices=["drop", "half"], default="drop")
    parser.add_argument(
        "--baseline",
        default="fewest-wins",
        help="baseline subject label, or 'fewest-wins' (default)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairrank",
        description="Rank subjects from paired comparisons.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service; default runs in process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse and summarize a games file")
    _add_dataset_arguments(p_ingest)
    p_ingest.add_argument("--output", help="write the canonical CSV export here")
    p_ingest.set_defaults(func=cmd_ingest)

    p_fit = sub.add_parser("fit", help="fit merits and print the ranking table")
    _add_dataset_arguments(p_fit)
    p_fit.add_argument("--link", choices=list(available_links()), default="probit")
    p_fit.add_argument("--tolerance", type=float, default=None)
    p_fit.add_argument("--max-iterations", type=int, default=100)
    p_fit.add_argument("--kantorovich-radius", type=float, default=1.0)
    p_fit.add_argument("--output", help="write the full-precision JSON report here")
    p_fit.set_defaults(func=cmd_fit)

    p_seeds = sub.add_parser("seeds", help="pick six playoff seeds per conference")
    _add_dataset_arguments(p_seeds)
    p_seeds.add_argument(
        "--grouping",
        required=True,
        help=f"label,conference,division CSV, or '{datasets.NFL2018}'",
    )
    p_seeds.add_argument("--rule", choices=["pct", "merit"], default="pct")
    p_seeds.add_argument("--link", choices=list(available_links()), default="probit")
    p_seeds.add_argument("--output", help="write the JSON seed lists here")
    p_seeds.set_defaults(func=cmd_seeds)

    p_sim = sub.add_parser("simulate", help="run Monte Carlo studies")
    p_sim.add_argument(
        "--study", choices=["connectivity", "coverage", "consistency"], default=None
    )
    p_sim.add_argument(
        "--preset",
        choices=sorted(PRESET_REPLICATIONS),
        default=None,
        help="run a bundled grid instead of a single cell",
    )
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument(
        "--n-list", type=int, nargs="+", default=None, help="sizes for consistency"
    )
    p_sim.add_argument("--p-rule", default="log n/n")
    p_sim.add_argument("--c", type=float, default=0.4)
    p_sim.add_argument(
        "--comparisons-per-pair", "-T", type=int, default=1, dest="comparisons_per_pair"
    )
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=20180906)
    p_sim.add_argument("--pairs", type=_parse_pairs, default=None, help="e.g. '1,2;9,10'")
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--link", choices=list(available_links()), default="probit")
    p_sim.add_argument("--sampling-scale", type=float, default=1.0)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--output", help="write the JSON records here")
    p_sim.set_defaults(func=cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (PairRankError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(run())
