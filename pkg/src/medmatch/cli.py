"""Command-line interface: serve, query, solve, bench, ingest."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    DEFAULT_PROVIDERS,
    DEFAULT_REPETITIONS,
    DEFAULT_SIZES,
    bench_csv,
    run_bench,
)
from .catalog import (
    CatalogError,
    CatalogSnapshot,
    default_schemas,
    ingest_providers,
    load_schema,
    snapshot_from_json,
    snapshot_to_json,
)
from .matching import match_query
from .querylang import QuerySyntaxError, QueryValidationError, parse_query, validate
from .response import render, render_plain
from .satcore import result_lines, solve_dimacs


def load_catalog_file(path: str, schema_path: str | None = None) -> CatalogSnapshot:
    """A catalog file is either a snapshot JSON object or a provider
    document (JSON array or CSV) validated against the default schema."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return snapshot_from_json(text)
    schemas = (
        load_schema(Path(schema_path).read_text(encoding="utf-8"))
        if schema_path
        else default_schemas()
    )
    return ingest_providers(text, schemas)


def _cmd_query(args) -> int:
    try:
        snapshot = load_catalog_file(args.catalog, args.schema)
        ast = validate(parse_query(args.query), list(snapshot.schemas))
    except (CatalogError, QuerySyntaxError, QueryValidationError) as exc:
        position = getattr(exc, "position", None)
        suffix = f" (offset {position})" if position is not None else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return 2
    report = match_query(ast, snapshot, query_text=args.query)
    rendered = render(report, snapshot.schemas)
    if args.json:
        print(json.dumps(rendered.to_dict(), indent=2))
    else:
        print(rendered.summary_text)
        print()
        print(render_plain(report), end="")
        for text in rendered.relaxation_texts:
            print(f"suggestion: {text}")
    return 0


def _cmd_solve(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
        outcome, num_vars = solve_dimacs(text)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in result_lines(outcome, num_vars):
        print(line)
    return 10 if outcome.sat else 20


def _cmd_bench(args) -> int:
    sizes = (
        [int(part) for part in args.sizes.split(",") if part.strip()]
        if args.sizes
        else list(DEFAULT_SIZES)
    )
    try:
        rows = run_bench(
            sizes, repetitions=args.reps, providers=args.providers, seed=args.seed
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    csv_text = bench_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.out}")
    print(csv_text, end="")
    return 0


def _cmd_ingest(args) -> int:
    try:
        source = Path(args.file).read_text(encoding="utf-8")
        previous = 0
        schemas = None
        catalog_path = Path(args.catalog)
        if catalog_path.exists():
            existing = snapshot_from_json(catalog_path.read_text(encoding="utf-8"))
            previous = existing.version
            schemas = list(existing.schemas)
        if schemas is None:
            schemas = (
                load_schema(Path(args.schema).read_text(encoding="utf-8"))
                if args.schema
                else default_schemas()
            )
        snapshot = ingest_providers(source, schemas, previous)
        catalog_path.write_text(snapshot_to_json(snapshot), encoding="utf-8")
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"version {snapshot.version}: {len(snapshot.providers)} providers")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medmatch")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="path to a JSON config file")
    serve.set_defaults(func=_cmd_serve)

    query = sub.add_parser("query", help="match a query against a catalog file")
    query.add_argument("--catalog", required=True, help="snapshot JSON, provider JSON, or CSV")
    query.add_argument("--schema", help="schema JSON for provider documents")
    query.add_argument("--json", action="store_true", help="print the full JSON response")
    query.add_argument("query", help="query text")
    query.set_defaults(func=_cmd_query)

    solve = sub.add_parser("solve", help="solve a DIMACS CNF file")
    solve.add_argument("file")
    solve.set_defaults(func=_cmd_solve)

    bench = sub.add_parser("bench", help="run the scaling study")
    bench.add_argument("--sizes", help="comma-separated query sizes (default: the sweep)")
    bench.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    bench.add_argument("--providers", type=int, default=DEFAULT_PROVIDERS)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="CSV output path")
    bench.set_defaults(func=_cmd_bench)

    ingest = sub.add_parser("ingest", help="ingest a provider document into a snapshot file")
    ingest.add_argument("file", help="provider JSON or CSV")
    ingest.add_argument("--catalog", required=True, help="snapshot JSON path to write")
    ingest.add_argument("--schema", help="schema JSON (fresh catalogs only)")
    ingest.set_defaults(func=_cmd_ingest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
