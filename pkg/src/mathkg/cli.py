"""
Command-line entry point.

Exit codes: 0 on success, 1 on a domain error (diagnostics, unknown
entities, bad input), 2 on a usage error (reported by argparse).
Command output goes to standard output; logs and diagnostics go to
standard error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable

from mathkg.chem import parse_ce
from mathkg.core.config import CliConfig, load_cli_config
from mathkg.core.exceptions import ChemSyntaxError, MathKGError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.formula import parse_with_diagnostics, supported_commands
from mathkg.formula.corpus import read_corpus, validate_corpus
from mathkg.formula.registry import CommandRegistry, load_registry
from mathkg.importer import FixtureConnector, ParserFactory, import_entity, run_datasource, seed
from mathkg.kg import KnowledgeGraphStore, open_store
from mathkg.mathml import EmitOptions, MacroTable, default_macro_table, emit_mathml
from mathkg.query import (
    formula_homepage,
    parse_patterns,
    resolve_reference,
    select,
    store_link_resolver,
    transitive,
    write_homepage,
)
from mathkg.search import FormulaIndex, index_path

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class CliContext:
    """Configuration plus lazily loaded tables and store for one invocation."""

    def __init__(self, config: CliConfig):
        self.config = config
        self.registry: CommandRegistry = load_registry(config.registry_path)
        if config.macro_table_path is not None:
            self.macro_table = MacroTable.from_file(config.macro_table_path, self.registry)
        else:
            self.macro_table = default_macro_table()
        self._store: KnowledgeGraphStore | None = None

    @property
    def store(self) -> KnowledgeGraphStore:
        if self._store is None:
            self._store = open_store(self.config.store_path, macro_table=self.macro_table)
        return self._store

    def save(self, rebuild_index: bool = True) -> None:
        self.store.save(self.config.store_path)
        if rebuild_index:
            index = FormulaIndex(self.macro_table)
            index.rebuild(self.store)
            index.save(index_path(self.config.store_path))

    def index(self) -> FormulaIndex:
        path = index_path(self.config.store_path)
        if path.exists():
            return FormulaIndex.load(path, self.macro_table)
        index = FormulaIndex(self.macro_table)
        index.rebuild(self.store)
        return index

    @property
    def json(self) -> bool:
        return self.config.output_format == "json"


def _print(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _print_diagnostics(diagnostics) -> None:
    for diagnostic in diagnostics:
        sys.stderr.write(diagnostic.to_json() + "\n")


# ==========================================
# Commands
# ==========================================


def cmd_render(args: argparse.Namespace, ctx: CliContext) -> int:
    node, diagnostics = parse_with_diagnostics(
        args.texvc, macros=ctx.macro_table.nodes, registry=ctx.registry
    )
    _print_diagnostics(diagnostics)
    if node is None:
        return 1
    opts = EmitOptions(
        display="inline" if args.inline else "block",
        resolve_links=args.links,
        link_resolver=store_link_resolver(ctx.store, ctx.config.entity_url_template)
        if args.links
        else None,
        macro_table=ctx.macro_table,
        registry=ctx.registry,
        source=args.texvc,
    )
    _print(emit_mathml(node, opts))
    return 0


def cmd_validate(args: argparse.Namespace, ctx: CliContext) -> int:
    if args.corpus is not None:
        report = validate_corpus(read_corpus(args.corpus))
        if ctx.json:
            _print(report.model_dump_json(indent=2))
        else:
            _print(f"total\t{report.total}\nparsed\t{report.parsed}\n" + report.to_tsv())
        return 0
    if args.texvc is None:
        raise MathKGError("validate needs a formula or --corpus")
    node, diagnostics = parse_with_diagnostics(
        args.texvc, macros=ctx.macro_table.nodes, registry=ctx.registry
    )
    if ctx.json:
        _print(json.dumps([d.to_dict() for d in diagnostics], ensure_ascii=False, indent=2))
    else:
        for d in diagnostics:
            _print(f"{d.severity}\t{d.byte_offset}\t{d.length}\t{d.message}")
    return 0 if node is not None else 1


def cmd_chem(args: argparse.Namespace, ctx: CliContext) -> int:
    try:
        equation = parse_ce(args.input)
    except ChemSyntaxError as e:
        sys.stderr.write(
            json.dumps({"offset": e.offset, "length": e.length, "message": e.message}) + "\n"
        )
        return 1
    _print(emit_mathml(equation, EmitOptions(source=f"\\ce{{{args.input}}}", registry=ctx.registry)))
    return 0


def cmd_commands(args: argparse.Namespace, ctx: CliContext) -> int:
    listing = supported_commands(ctx.registry)
    if ctx.json:
        _print(json.dumps([{"name": n, "arity": a, "class": c} for n, a, c in listing], indent=2))
    else:
        _print("".join(f"{n}\t{a}\t{c}\n" for n, a, c in listing))
    return 0


def cmd_seed(args: argparse.Namespace, ctx: CliContext) -> int:
    report = seed(ctx.store, args.fixture_dir)
    ctx.save()
    _print(report.to_json())
    return 0


def cmd_import(args: argparse.Namespace, ctx: CliContext) -> int:
    if args.file is not None:
        parser = ParserFactory.for_path(
            args.file, id_registry=ctx.store.id_registry, macro_table=ctx.macro_table
        )
        report = run_datasource(ctx.store, parser, args.file)
        ctx.save()
        _print(report.to_json())
        return 0
    if args.upstream_id is None:
        raise MathKGError("import needs an upstream id or --file")
    connector = FixtureConnector(args.fixtures)
    local = import_entity(
        ctx.store, connector, args.upstream_id, args.depth, workers=ctx.config.fetch_workers
    )
    ctx.save()
    _print(str(local))
    return 0


def cmd_query(args: argparse.Namespace, ctx: CliContext) -> int:
    store = ctx.store
    if args.transitive is not None:
        start = resolve_reference(store, args.transitive[0], "item")
        property_id = resolve_reference(store, args.transitive[1], "property")
        reached = sorted(transitive(store, start, property_id, args.direction))
        if ctx.json:
            _print(json.dumps([str(r) for r in reached]))
        else:
            sys.stdout.write("".join(f"{r}\n" for r in reached))
        return 0
    if args.patterns is None:
        raise MathKGError("query needs a pattern text or --transitive")
    result = select(store, parse_patterns(args.patterns, store))
    _print(result.to_json() if ctx.json else result.to_tsv())
    return 0


def cmd_search(args: argparse.Namespace, ctx: CliContext) -> int:
    hits = ctx.index().search(args.texvc, args.mode, args.limit)
    if ctx.json:
        _print(json.dumps([{"item": str(h.item), "score": h.score} for h in hits], indent=2))
    else:
        sys.stdout.write("".join(h.to_tsv() + "\n" for h in hits))
    return 0


def cmd_homepage(args: argparse.Namespace, ctx: CliContext) -> int:
    item = resolve_reference(ctx.store, args.item, "item")
    doc = formula_homepage(ctx.store, item, ctx.macro_table, ctx.config.entity_url_template)
    out_dir = Path(args.out) if args.out else Path(ctx.config.store_path) / PP.HOMEPAGE_DIR_NAME
    html_path, json_path = write_homepage(doc, out_dir)
    _print(f"{html_path}\n{json_path}")
    return 0


def cmd_stats(args: argparse.Namespace, ctx: CliContext) -> int:
    store = ctx.store
    stats = {
        "items": len(store.entities("item")),
        "properties": len(store.entities("property")),
        "statements": store.statement_count,
        "triples": store.triple_count,
        "mappings": len(store.mappings()),
        "indexed_formulas": len(ctx.index()),
    }
    if ctx.json:
        _print(json.dumps(stats, indent=2))
    else:
        _print("".join(f"{key}\t{value}\n" for key, value in stats.items()))
    return 0


# ==========================================
# Argument parsing
# ==========================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mathkg", description="Formula-aware mathematical knowledge graph toolkit."
    )
    parser.add_argument("--store", help="Store directory (env MATHKG_STORE)")
    parser.add_argument("--format", choices=["tsv", "json"], help="Output format")
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("--macro-table", help="Semantic macro table (TSV)")
    parser.add_argument("--registry", help="Command registry (TSV)")
    parser.add_argument("--log-level", help="Logging level, e.g. INFO")
    commands = parser.add_subparsers(dest="command", required=True)

    render_p = commands.add_parser("render", help="Render texvc as MathML")
    render_p.add_argument("texvc")
    render_p.add_argument("--inline", action="store_true", help="Inline display mode")
    render_p.add_argument("--links", action="store_true", help="Resolve semantic macro links")
    render_p.set_defaults(handler=cmd_render)

    validate_p = commands.add_parser("validate", help="Report diagnostics for a formula")
    validate_p.add_argument("texvc", nargs="?")
    validate_p.add_argument("--corpus", help="Validate every line of a corpus file")
    validate_p.set_defaults(handler=cmd_validate)

    chem_p = commands.add_parser("chem", help="Render mhchem notation as MathML")
    chem_p.add_argument("input")
    chem_p.set_defaults(handler=cmd_chem)

    commands_p = commands.add_parser("commands", help="List supported texvc commands")
    commands_p.set_defaults(handler=cmd_commands)

    seed_p = commands.add_parser("seed", help="Load every datasource file of a directory")
    seed_p.add_argument("fixture_dir", nargs="?", default=str(PP.SEED_FIXTURES_DIR))
    seed_p.set_defaults(handler=cmd_seed)

    import_p = commands.add_parser("import", help="Import an entity or a datasource file")
    import_p.add_argument("upstream_id", nargs="?")
    import_p.add_argument("--depth", type=int, default=1)
    import_p.add_argument("--fixtures", default=str(PP.WIKIDATA_FIXTURES_DIR))
    import_p.add_argument("--file", help="Datasource file to run instead of an entity import")
    import_p.set_defaults(handler=cmd_import)

    query_p = commands.add_parser("query", help="Run triple patterns or a transitive query")
    query_p.add_argument("patterns", nargs="?")
    query_p.add_argument("--transitive", nargs=2, metavar=("START", "PROPERTY"))
    query_p.add_argument("--direction", choices=["forward", "inverse"], default="forward")
    query_p.set_defaults(handler=cmd_query)

    search_p = commands.add_parser("search", help="Search stored formulas")
    search_p.add_argument("texvc")
    search_p.add_argument("--mode", choices=["exact", "subexpression"], default="subexpression")
    search_p.add_argument("--limit", type=int, default=10)
    search_p.set_defaults(handler=cmd_search)

    homepage_p = commands.add_parser("homepage", help="Write a formula homepage")
    homepage_p.add_argument("item")
    homepage_p.add_argument("--out", help="Output directory (default <store>/homepages)")
    homepage_p.set_defaults(handler=cmd_homepage)

    stats_p = commands.add_parser("stats", help="Store and index counts")
    stats_p.set_defaults(handler=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_cli_config(
            args.config,
            store_path=args.store,
            output_format=args.format,
            macro_table_path=args.macro_table,
            registry_path=args.registry,
            log_level=args.log_level,
        )
    except (FileNotFoundError, RuntimeError, ValueError) as e:
        sys.stderr.write(f"mathkg: {e}\n")
        return 1
    logging.basicConfig(
        level=config.log_level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True
    )

    handler: Callable[[argparse.Namespace, CliContext], int] = args.handler
    try:
        return handler(args, CliContext(config))
    except MathKGError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        sys.stderr.write(f"mathkg {args.command}: {e}\n")
        return 1
