"""Command-line interface: ``pocsim simulate | analyze | verify | moments``.

Exit status: 0 success, 1 theorem violation found, 2 usage/config error,
3 data/parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .change import EffortParams
from .errors import (
    InfeasibleKnobsError,
    InvalidModelError,
    PocError,
    ScenarioError,
)
from .ingest import analyze, export_dataset, parse_events, parse_snapshots
from .moments import (
    POPULATION,
    MomentSummary,
    burden_closed_form,
    uncertainty_closed_form,
    verify_theorem,
)
from .scenario import (
    graph_path,
    population_path,
    run_simulation,
    scenario_description,
    scenario_from_mapping,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("pocsim")

FORMAT_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3

COLUMNS = (
    "source",
    "replication",
    "t",
    "mu",
    "sigma_d2",
    "sigma_eps2",
    "cov_d_eps",
    "B",
    "U",
    "delta_B",
    "delta_U",
    "a1",
    "a2",
    "a3",
    "a4",
    "regime",
)

COLUMN_HELP = """\
output table (format_version 1), one row per step, columns in this order:
  source       population | empirical
  replication  replication index for empirical rows, empty for population rows
  t            step label
  mu           mean out-degree of changed entities
  sigma_d2     variance of that degree
  sigma_eps2   residual variance
  cov_d_eps    degree/residual covariance
  B            burden, the expected effort
  U            uncertainty, the effort variance
  delta_B      B[t+1] - B[t]   (empty on the last step)
  delta_U      U[t+1] - U[t]   (empty on the last step)
  a1           mean degree does not fall, t -> t+1 (true/false)
  a2           degree variance does not rise
  a3           residual variance does not rise
  a4           degree/residual covariance does not rise
  regime       regime label of the step t -> t+1
"""


class UsageError(Exception):
    pass


# -- output ------------------------------------------------------------------


def _series_rows(source, replication, summaries, states, deltas, assumptions, regimes, labels=None):
    rows = []
    for i, (s, st) in enumerate(zip(summaries, states)):
        row = {
            "source": source,
            "replication": replication,
            "t": labels[i] if labels is not None else s.t,
            "mu": s.mu,
            "sigma_d2": s.sigma_d2,
            "sigma_eps2": s.sigma_eps2,
            "cov_d_eps": s.cov_d_eps,
            "B": st.burden,
            "U": st.uncertainty,
            "delta_B": None,
            "delta_U": None,
            "a1": None,
            "a2": None,
            "a3": None,
            "a4": None,
            "regime": None,
        }
        if i < len(deltas):
            d, a = deltas[i], assumptions[i]
            row.update(
                delta_B=d.delta_b,
                delta_U=d.delta_u,
                a1=a.a1_holds,
                a2=a.a2_holds,
                a3=a.a3_holds,
                a4=a.a4_holds,
                regime=regimes[i].value,
            )
        rows.append(row)
    return rows


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows, fmt, meta):
    if fmt == "json":
        doc = {"format_version": FORMAT_VERSION, **meta, "columns": list(COLUMNS), "rows": rows}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_csv_cell(r[c]) for c in COLUMNS])
    return buf.getvalue()


def _emit(text, out_path):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


# -- inputs ------------------------------------------------------------------


def bundled_scenarios() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("pocsim.data").iterdir() if p.name.endswith(".toml"))


def load_config(path: str) -> dict:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        res = resources.files("pocsim.data") / f"{name}.toml"
        if not res.is_file():
            raise UsageError(f"no bundled scenario {name!r}; available: {', '.join(bundled_scenarios())}")
        return tomllib.loads(res.read_text(encoding="utf-8"))
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"scenario file not found: {path}")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        if p.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"malformed scenario file {path}: {exc}") from exc


def resolve_seed(flag, config):
    if flag is not None:
        return flag
    env = os.environ.get("POC_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"POC_SEED must be an integer, got {env!r}") from None
    return int(config.get("seed", 0))


def _load_scenario(args):
    cfg = load_config(args.scenario)
    seed = resolve_seed(args.seed, cfg)
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed}")
    try:
        return scenario_from_mapping(cfg, seed)
    except (ScenarioError, InvalidModelError) as exc:
        raise UsageError(f"invalid scenario {args.scenario}: {exc}") from exc


def _need_file(path, what):
    if path is None:
        raise UsageError(f"--{what} is required")
    if not Path(path).is_file():
        raise UsageError(f"{what} file not found: {path}")
    return Path(path)


def _params_from_args(args, required):
    if args.alpha is None and args.beta is None and not required:
        return None
    if args.alpha is None:
        raise UsageError("--alpha is required")
    try:
        return EffortParams(args.alpha, 0.0 if args.beta is None else args.beta)
    except InvalidModelError as exc:
        raise UsageError(str(exc)) from exc


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    trajectories = run_simulation(scenario, args.replications, workers=args.workers, tolerance=args.tolerance)
    first = trajectories[0]
    rows = _series_rows(
        POPULATION, None, first.population, first.states, first.deltas, first.assumptions, first.regimes
    )
    for tr in trajectories:
        if tr.empirical is not None:
            rows += _series_rows(
                "empirical",
                tr.replication,
                tr.empirical,
                tr.empirical_states,
                tr.empirical_deltas,
                tr.empirical_assumptions,
                tr.empirical_regimes,
            )
    meta = {"command": "simulate", "replications": args.replications, "scenario": scenario_description(scenario)}
    _emit(render(rows, args.format, meta), args.out)
    if args.export:
        graphs = graph_path(scenario)
        for tr in trajectories:
            target = Path(args.export) if len(trajectories) == 1 else Path(args.export) / f"rep{tr.replication:03d}"
            export_dataset(graphs, tr.events, target)
    return EXIT_OK


def cmd_analyze(args) -> int:
    snap_path = _need_file(args.snapshots, "snapshots")
    ev_path = _need_file(args.events, "events")
    params = _params_from_args(args, required=False)
    snapshots = parse_snapshots(snap_path)
    records = parse_events(ev_path)
    report = analyze(snapshots, records, params, args.tolerance)
    rows = _series_rows(
        "empirical",
        None,
        report.summaries,
        report.states,
        report.deltas,
        report.assumptions,
        report.regimes,
        labels=report.labels,
    )
    meta = {
        "command": "analyze",
        "params": {"alpha": report.params.alpha, "beta": report.params.beta},
        "fit": None if report.fit is None else asdict(report.fit),
    }
    _emit(render(rows, args.format, meta), args.out)
    return EXIT_OK


def read_moment_series(path: Path) -> list[MomentSummary]:
    """CSV with columns t,mu,sigma_d2,sigma_eps2,cov_d_eps (population moments)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise PocError(f"{path}: empty moment series")
    header = [h.strip() for h in rows[0]]
    need = ["t", "mu", "sigma_d2", "sigma_eps2", "cov_d_eps"]
    if header[: len(need)] != need:
        raise PocError(f"{path}: header must start with {','.join(need)}")
    out = []
    for lineno, r in enumerate(rows[1:], 2):
        try:
            vals = [x.strip() for x in r[: len(need)]]
            out.append(MomentSummary(int(vals[0]), *(float(x) for x in vals[1:]), source=POPULATION))
        except (ValueError, IndexError) as exc:
            raise PocError(f"{path}:{lineno}: {exc}") from exc
    return out


def cmd_verify(args) -> int:
    if (args.scenario is None) == (args.moments is None):
        raise UsageError("verify needs exactly one of --scenario or --moments")
    if args.scenario is not None:
        scenario = _load_scenario(args)
        summaries = population_path(scenario)
        params = scenario.params
        source = {"scenario": scenario_description(scenario)}
    else:
        path = _need_file(args.moments, "moments")
        params = _params_from_args(args, required=True)
        summaries = read_moment_series(path)
        source = {"moments": str(path)}
    report = verify_theorem(summaries, params)
    if args.format == "json":
        doc = {"format_version": FORMAT_VERSION, "command": "verify", **source, "report": report.to_dict()}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = [report.summary_line()]
        for v in report.violations:
            lines.append(f"violation at t={v.t}: {v.reason}; before={v.before}; after={v.after}")
        lines.append("result: " + ("pass" if report.ok else "violation"))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_moments(args) -> int:
    params = _params_from_args(args, required=True)
    try:
        b = burden_closed_form(params, args.mu)
        u = uncertainty_closed_form(params, args.sigma_d2, args.sigma_eps2, args.cov)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        text = json.dumps({"format_version": FORMAT_VERSION, "command": "moments", "B": b, "U": u}) + "\n"
    else:
        text = f"B={b:.17g}\nU={u:.17g}\n"
    _emit(text, args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument(
        "--scenario", help="scenario config (.toml or .json), or builtin:<name> for a bundled one"
    )
    seeded.add_argument("--seed", type=int, help="master seed (u64); falls back to $POC_SEED, then the config")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--alpha", type=float, help="effort per dependency (> 0)")
    model.add_argument("--beta", type=float, help="baseline effort (>= 0, default 0)")

    parser = argparse.ArgumentParser(
        prog="pocsim",
        description="Burden/uncertainty simulator and analyzer for evolving dependency graphs.",
        epilog=COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate",
        parents=[common, seeded],
        help="run a scenario and write the trajectory table",
        epilog=COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--workers", type=int, default=1, help="threads for replications (output is unaffected)")
    p.add_argument("--tolerance", type=float, default=None, help="slack for empirical A1-A4 checks (default 1e-9)")
    p.add_argument("--export", help="directory for snapshots.txt/events.csv of the run")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "analyze",
        parents=[common, model],
        help="analyze ingested snapshots and event logs",
        epilog=COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--snapshots", help="snapshot file")
    p.add_argument("--events", help="event log CSV (t,node,effort)")
    p.add_argument("--tolerance", type=float, default=None, help="slack for A1-A4 checks (default 1e-9)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser(
        "verify",
        parents=[common, seeded, model],
        help="check the sufficient-conditions theorem on a population moment series",
    )
    p.add_argument("--moments", help="CSV t,mu,sigma_d2,sigma_eps2,cov_d_eps (use with --alpha/--beta)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("moments", parents=[common, model], help="closed-form B and U for given moments")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma-d2", type=float, required=True)
    p.add_argument("--sigma-eps2", type=float, required=True)
    p.add_argument("--cov", type=float, default=0.0)
    p.set_defaults(func=cmd_moments)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InfeasibleKnobsError) as exc:
        print(f"pocsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PocError as exc:
        print(f"pocsim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"pocsim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
