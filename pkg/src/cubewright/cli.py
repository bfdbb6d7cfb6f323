"""Command-line front end.

Exit codes: 0 success, 1 data or query error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib.resources import files
from pathlib import Path

from . import cube as olap
from .cube import Cube, CubeError, DateLevel
from .ingest import IngestError, parse_csv, parse_schema
from .pipeline import PipelineError, run_pipeline
from .prep import CleaningError, CleaningSpec, clean, validate
from .query import ParseError, QueryError, execute, parse_query
from .render import RenderFormat, render
from .workspace import CLEAN, RAW, Workspace, WorkspaceError, default_config

DATA_ERRORS = (IngestError, CleaningError, CubeError, QueryError, PipelineError,
               WorkspaceError, OSError, json.JSONDecodeError, KeyError)


class CommandError(Exception):
    pass


def _pairs(items, what: str) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise CommandError(f"{what} must look like NAME=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _emit(text: str, out) -> None:
    out.write(text)
    out.flush()


def cmd_ingest(args, ws: Workspace, out) -> int:
    if args.bakery:
        data = files("cubewright") / "data"
        source = data / "bakery.csv"
        config = json.loads((data / "bakery_workspace.json").read_text(encoding="utf-8"))
    else:
        if not args.input:
            raise CommandError("ingest needs an INPUT file (or --bakery)")
        source = Path(args.input)
        if args.config:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        elif ws.exists:
            config = ws.config()
        else:
            config = default_config()
    base = default_config()
    base.update(config)
    config = base
    config["schema"].setdefault("types", {}).update(_pairs(args.type, "--type"))
    config["schema"].setdefault("aliases", {}).update(_pairs(args.alias, "--alias"))

    raw = source.read_bytes()
    header = raw.decode("utf-8-sig").split("\n", 1)[0]
    schema = parse_schema(header, config["schema"]["types"], config["schema"]["aliases"])
    table = parse_csv(raw, schema, lenient=args.lenient)
    # all parsing done before anything touches the workspace
    ws.write_table(RAW, table)
    ws.save_config(config)
    summary = f"{len(table)} rows, {len(schema)} columns"
    if table.rejected:
        summary += f", {len(table.rejected)} rows skipped"
        for line, msg in table.rejected:
            sys.stderr.write(f"warning: {msg}\n")
    _emit(summary + "\n", out)
    return 0


def cmd_clean(args, ws: Workspace, out) -> int:
    config = ws.config()
    if args.spec:
        config["cleaning"] = CleaningSpec.from_json(Path(args.spec).read_text(encoding="utf-8")).to_dict()
    spec = CleaningSpec.from_dict(config["cleaning"]) if config.get("cleaning") else None
    if spec is None:
        raise WorkspaceError("no cleaning spec; pass --spec FILE")
    table = clean(ws.raw_table(), spec)
    domains = {k: v for k, v in (config.get("declared_members") or {}).items()
               if k in table.schema.names}
    violations = validate(table, {k: [str(m).upper() for m in v] for k, v in domains.items()})
    if violations:
        for row, col, value in violations:
            sys.stderr.write(f"error: row {row}: {col}={value!r} is outside the declared members\n")
        return 1
    ws.write_table(CLEAN, table)
    ws.save_config(config)
    _emit(f"{len(table)} rows, {len(table.schema)} columns ({', '.join(table.schema.names)})\n", out)
    return 0


def cmd_cube(args, ws: Workspace, out) -> int:
    config = ws.config()
    if args.dims:
        config["dims"] = [d.strip() for d in args.dims.split(",") if d.strip()]
    declared = config.get("declared_members") or {}
    for name, members in _pairs(args.declare, "--declare").items():
        declared[name] = [m.strip() for m in members.split(",") if m.strip()]
    config["declared_members"] = declared
    if not config.get("dims"):
        raise WorkspaceError("no dimensions; pass --dims A,B,C")
    cube = olap.build_cube(ws.clean_table(), config["dims"], declared or None)
    ws.save_config(config)
    ws.save_cube(cube)
    shape = " x ".join(f"{d.name}[{len(d)}]" for d in cube.dims)
    _emit(f"{shape}: {len(cube.cells)} stored cells, total {cube.total}\n", out)
    return 0


def _pipeline(ws: Workspace, queries):
    config = ws.config()
    spec = ws.cleaning_spec()
    raw_path = ws.path(RAW)
    if not raw_path.is_file():
        raise WorkspaceError(f"{raw_path} is missing; run 'cubewright ingest' first")
    return run_pipeline(
        raw_path, spec, ws.dims(), queries, batch_size=64,
        type_hints=config["schema"]["types"], aliases=config["schema"]["aliases"],
        declared_members=config.get("declared_members") or None,
    )


def _print_reports(run, args) -> None:
    if args.report:
        sys.stderr.write(run.reports_json() + "\n")


def cmd_query(args, ws: Workspace, out) -> int:
    try:
        q = parse_query(args.query)
    except ParseError as exc:
        sys.stderr.write(f"parse error:\n{exc.caret(args.query)}\n")
        return 1
    run = _pipeline(ws, [q])
    _print_reports(run, args)
    _emit(render(run.results[0], args.format), out)
    return 0


def cmd_report(args, ws: Workspace, out) -> int:
    run = _pipeline(ws, [])
    _print_reports(run, args)
    level = DateLevel.parse(args.level)
    cube = olap.rollup_date(run.cube, level)
    date_dim = next(d.name for d in cube.dims if d.is_date)
    for name in [d.name for d in cube.dims if d.name != date_dim]:
        cube = olap.rollup(cube, name)
    _emit(render_period_report(cube, args.format), out)
    return 0


def render_period_report(cube: Cube, fmt) -> str:
    """Per-period totals plus the leading period and its lead over the runner-up."""
    dim = cube.dims[0]
    counts = [cube.cells.get((i,), 0) for i in range(len(dim))]
    fmt = RenderFormat(fmt)
    ranked = sorted(range(len(counts)), key=lambda i: (-counts[i], i))
    top = ranked[0] if ranked else None
    lead = counts[ranked[0]] - counts[ranked[1]] if len(ranked) > 1 else None
    if fmt is RenderFormat.JSON:
        doc = {
            "dim": dim.name,
            "level": dim.level.name.lower(),
            "periods": [{"period": str(m), "count": n} for m, n in zip(dim.members, counts)],
            "total": sum(counts),
            "top": None if top is None else {"period": str(dim.members[top]), "count": counts[top],
                                             "lead": lead},
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [[dim.name, "COUNT"]] + [[str(m), str(n)] for m, n in zip(dim.members, counts)]
    rows.append(["TOTAL", str(sum(counts))])
    if fmt is RenderFormat.CSV:
        return "".join(",".join(r) + "\n" for r in rows)
    width = max(len(r[0]) for r in rows)
    nwidth = max(len(r[1]) for r in rows)
    text = "".join(f"{r[0].ljust(width)}  {r[1].rjust(nwidth)}\n" for r in rows)
    if top is not None:
        text += f"TOP {dim.members[top]} ({counts[top]})"
        if lead is not None:
            text += f", ahead of {dim.members[ranked[1]]} by {lead}"
        text += "\n"
    return text


def cmd_repl(args, ws: Workspace, out, stdin=None) -> int:
    stdin = stdin or sys.stdin
    run = _pipeline(ws, [])
    _print_reports(run, args)
    base = current = run.cube
    interactive = stdin.isatty() if hasattr(stdin, "isatty") else False
    failed = False
    while True:
        if interactive:
            out.write("cube> ")
            out.flush()
        line = stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line in (":quit", ":q", ":exit"):
            break
        if line == ":reset":
            current = base
            continue
        if line == ":dims":
            _emit(", ".join(f"{d.name}[{len(d)}]" for d in current.dims) + "\n", out)
            continue
        try:
            result = execute(parse_query(line), current)
        except ParseError as exc:
            _emit(f"parse error:\n{exc.caret(line)}\n", out)
            failed = True
            continue
        except QueryError as exc:
            _emit(f"error: {exc}\n", out)
            failed = True
            continue
        if isinstance(result, Cube):
            current = result
        _emit(render(result, args.format), out)
    return 1 if failed else 0


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--workspace", "-w", default=default(None),
                   help="workspace directory (default: $CUBEWRIGHT_WORKSPACE or .)")
    p.add_argument("--format", "-f", choices=[f.value for f in RenderFormat],
                   default=default("pretty"), help="output format")
    p.add_argument("--report", action="store_true", default=default(False),
                   help="print per-stage pipeline reports as JSON on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubewright", description="In-memory OLAP count cube.")
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse a CSV file into the workspace")
    p.add_argument("input", nargs="?")
    p.add_argument("--type", action="append", metavar="COL=TYPE",
                   help="column type: date, categorical, integer or text")
    p.add_argument("--alias", action="append", metavar="FROM=TO", help="header spelling alias")
    p.add_argument("--config", help="workspace.json to seed the workspace with")
    p.add_argument("--lenient", action="store_true", help="skip malformed rows instead of failing")
    p.add_argument("--bakery", action="store_true", help="ingest the bundled bakery example")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("clean", parents=[common], help="project and canonicalize the raw table")
    p.add_argument("--spec", help="cleaning spec JSON document")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("cube", parents=[common], help="build and save the count cube")
    p.add_argument("--dims", help="comma-separated dimension columns")
    p.add_argument("--declare", action="append", metavar="DIM=a,b,c",
                   help="declared member list for a dimension")
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("query", parents=[common], help="run one query through the pipeline")
    p.add_argument("query")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("repl", parents=[common], help="interactive queries; :quit to leave")
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("report", parents=[common], help="order totals per month (or year)")
    p.add_argument("--level", choices=["month", "year"], default="month")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    ws = Workspace.at(args.workspace)
    try:
        return args.func(args, ws, out)
    except CommandError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except DATA_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
