"""Command-line interface: reproducible runs over citation-graph files.

Every subcommand reads the same node/edge file formats, takes its options
from flags merged over an optional JSON config (flags win), and derives
all randomness from one seed, so identical invocations write identical
bytes.  Data goes to files under --out (or stdout when no --out is given);
progress and errors go to stderr.  Exit codes: 0 ok, 1 usage, 2 bad data.

The CITENET_THREADS environment variable sizes the worker pool for
per-block layouts; any value yields identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import graph_store, kqi, laws, topic_tree, vsan

DEFAULT_SEED = 17

STRATEGY_ALIASES = {
    "flat": "flat",
    "citation": "citation_primary_parent",
    "citation_primary_parent": "citation_primary_parent",
    "community": "community_two_level",
    "community_two_level": "community_two_level",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="citenet",
                     description="citation-network analytics toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_graph_args(p):
        p.add_argument("--nodes", required=True, help="nodes CSV or JSONL file")
        p.add_argument("--edges", help="edges CSV file (citing_id,cited_id)")
        p.add_argument("--policy", choices=["reject", "stub"], default=None,
                       help="dangling-edge policy (default reject)")

    def add_common(p):
        p.add_argument("--config", help="JSON config file merged under the flags")
        p.add_argument("--seed", type=int, default=None,
                       help=f"run seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="output directory (default: print to stdout)")

    p = sub.add_parser("ingest-check", help="validate inputs, report counts")
    add_graph_args(p)
    add_common(p)

    p = sub.add_parser("kqi", help="entropy report and per-paper scores")
    add_graph_args(p)
    add_common(p)
    p.add_argument("--strategy", default=None,
                   choices=sorted(STRATEGY_ALIASES),
                   help="encoding-tree strategy (default citation)")

    p = sub.add_parser("rank", help="entity ranking from per-paper scores")
    add_graph_args(p)
    add_common(p)
    p.add_argument("--strategy", default=None, choices=sorted(STRATEGY_ALIASES))
    p.add_argument("--by", default=None,
                   choices=["first_author", "affiliation", "country"],
                   help="aggregation key (default first_author)")
    p.add_argument("--top-k", type=int, default=None)

    p = sub.add_parser("laws", help="network-value law series and slope fits")
    add_graph_args(p)
    add_common(p)
    p.add_argument("--strategy", default=None, choices=sorted(STRATEGY_ALIASES))
    p.add_argument("--years", default=None,
                   help="comma-separated snapshot years (default: every year)")
    p.add_argument("--every", type=int, default=None,
                   help="snapshot stride when --years is not given")
    p.add_argument("--plot", action="store_true",
                   help="also render the log-log figure")

    p = sub.add_parser("layout", help="multilevel layout to JSONL + SVG")
    add_graph_args(p)
    add_common(p)
    p.add_argument("--mode", default=None,
                   help="community | attribute:<key> (default community)")
    p.add_argument("--iterations-sub", type=int, default=None)
    p.add_argument("--iterations-block", type=int, default=None)
    p.add_argument("--no-finetune", action="store_true")
    p.add_argument("--no-edges", action="store_true",
                   help="do not draw edges in the SVG")
    p.add_argument("--timings", action="store_true",
                   help="also write stage timings (wall clock, not reproducible)")

    p = sub.add_parser("topictree", help="topic hierarchy from a concept corpus")
    add_common(p)
    p.add_argument("--corpus", required=True, help="JSONL {doc_id, concepts}")
    p.add_argument("--dictionary", help="entity names, one per line")
    p.add_argument("--min-doc-freq", type=int, default=None)
    p.add_argument("--min-pair-count", type=int, default=None)
    p.add_argument("--max-levels", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None)

    p = sub.add_parser("stats", help="annual publication counts")
    add_graph_args(p)
    add_common(p)
    p.add_argument("--plot", action="store_true")

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Flags win over config file values, which win over defaults."""
    merged = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        merged.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None and value is not False:
            merged[key] = value
    merged.setdefault("seed", DEFAULT_SEED)
    merged.setdefault("policy", "reject")
    return merged


def _load_graph(opts: dict) -> graph_store.CitationGraph:
    nodes = opts.get("nodes")
    if not nodes:
        raise UsageError("--nodes is required")
    edges_path = opts.get("edges")
    if edges_path:
        edges_source = edges_path
    else:
        import io
        edges_source = io.StringIO("citing_id,cited_id\n")
    options = graph_store.IngestOptions(dangling=opts["policy"])
    return graph_store.ingest(nodes, edges_source, options)


def _out_dir(opts: dict) -> Path | None:
    out = opts.get("out")
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None, filename: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        (out / filename).write_text(text, encoding="utf-8")


def _strategy(opts: dict) -> str:
    name = opts.get("strategy") or "citation"
    if name not in STRATEGY_ALIASES:
        raise UsageError(f"unknown strategy {name!r}")
    return STRATEGY_ALIASES[name]


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------

def cmd_ingest_check(opts: dict) -> int:
    graph = _load_graph(opts)
    violations = graph_store.temporal_violations(graph)
    report = graph.ingest_report.as_dict()
    report["temporal_violations"] = len(violations)
    report["violating_edges"] = [list(edge) for edge in violations]
    years = graph.year_range()
    report["year_range"] = list(years) if years else None
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    _emit(text, _out_dir(opts), "ingest_report.json")
    return 0


def cmd_kqi(opts: dict) -> int:
    graph = _load_graph(opts)
    tree = kqi.build_encoding_tree(graph, _strategy(opts), seed=opts["seed"])
    report = kqi.kqi_total(graph, tree)
    scores = kqi.kqi_per_node(graph, tree)
    out = _out_dir(opts)
    text = json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out is not None:
        (out / "kqi_report.json").write_text(text, encoding="utf-8")
        kqi.export_scores_tsv(scores, out / "kqi_scores.tsv")
    return 0


def cmd_rank(opts: dict) -> int:
    graph = _load_graph(opts)
    tree = kqi.build_encoding_tree(graph, _strategy(opts), seed=opts["seed"])
    scores = kqi.kqi_per_node(graph, tree)
    by = opts.get("by") or "first_author"
    ranking = kqi.aggregate_scores(scores, graph, by, top_k=opts.get("top_k"))
    lines = ["rank\tentity_id\tkqi_bits"]
    for rank, (entity, value) in enumerate(ranking.rows, start=1):
        lines.append(f"{rank}\t{entity}\t{value:.12g}")
    text = "\n".join(lines) + "\n"
    _emit(text, _out_dir(opts), "ranking.tsv")
    if ranking.skipped:
        print(f"skipped {ranking.skipped} papers missing {by}", file=sys.stderr)
    return 0


def _snapshot_years(graph: graph_store.CitationGraph, opts: dict) -> list[int]:
    if opts.get("years"):
        try:
            years = sorted({int(y) for y in str(opts["years"]).split(",") if y.strip()})
        except ValueError:
            raise UsageError("--years must be comma-separated integers") from None
        if not years:
            raise UsageError("--years is empty")
        return years
    bounds = graph.year_range()
    if bounds is None:
        raise graph_store.GraphDataError("no dated papers; cannot build snapshots")
    stride = opts.get("every") or 1
    lo, hi = bounds
    years = list(range(lo, hi + 1, stride))
    if years[-1] != hi:
        years.append(hi)
    return years


def cmd_laws(opts: dict) -> int:
    graph = _load_graph(opts)
    years = _snapshot_years(graph, opts)
    series = laws.law_series(graph, years, _strategy(opts), seed=opts["seed"])
    fits = laws.standard_fits(series)
    out = _out_dir(opts)
    if out is None:
        payload = {name: fit.as_dict() for name, fit in sorted(fits.items())}
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        laws.export_series_csv(series, out / "laws_series.csv")
        laws.export_fits_json(fits, out / "laws_fits.json")
        if opts.get("plot"):
            from . import plots
            plots.plot_law_series(series, out / "laws_plot.svg")
    return 0


def cmd_layout(opts: dict) -> int:
    graph = _load_graph(opts)
    iters_sub = opts.get("iterations_sub")
    iters_block = opts.get("iterations_block")
    config = vsan.LayoutConfig(
        seed=opts["seed"],
        segmentation_mode=opts.get("mode") or "community",
        iterations_sub=100 if iters_sub is None else iters_sub,
        iterations_block=150 if iters_block is None else iters_block,
        finetune_enabled=not opts.get("no_finetune", False),
    )
    partition = vsan.segment_graph(graph, config.segmentation_mode, seed=config.seed)
    positions = vsan.vsan_pipeline(graph, config, partition=partition)
    out = _out_dir(opts)
    if out is None:
        raise UsageError("layout requires --out for its JSONL and SVG files")
    vsan.export_positions_jsonl(positions, out / "positions.jsonl", partition)
    vsan.render_svg(graph, positions, out / "layout.svg", partition,
                    render_edges=False if opts.get("no_edges") else None)
    if opts.get("timings"):
        vsan.export_timings_json(positions, out / "timings.json")
    print(f"laid out {len(positions.coords)} nodes in "
          f"{partition.community_count} blocks", file=sys.stderr)
    return 0


def cmd_topictree(opts: dict) -> int:
    corpus = topic_tree.load_corpus_jsonl(opts["corpus"])
    coocc = topic_tree.build_cooccurrence(
        corpus,
        min_doc_freq=opts.get("min_doc_freq") or 1,
        min_pair_count=opts.get("min_pair_count") or 1)
    tree = topic_tree.build_topic_tree(
        coocc, max_levels=opts.get("max_levels") or 5, seed=opts["seed"])
    dictionary: list[str] = []
    if opts.get("dictionary"):
        dictionary = [line.strip() for line
                      in Path(opts["dictionary"]).read_text(encoding="utf-8").splitlines()
                      if line.strip()]
    tree = topic_tree.label_topics(tree, corpus, dictionary,
                                   top_k=opts.get("top_k") or 5)
    out = _out_dir(opts)
    if out is None:
        raise UsageError("topictree requires --out for its JSON and CSV files")
    topic_tree.export_tree_json(tree, out / "topic_tree.json")
    topic_tree.export_tree_csv(tree, out / "topic_tree.csv")
    print(f"{len(tree.levels[1])} leaf topics, {len(tree.levels)} levels",
          file=sys.stderr)
    return 0


def cmd_stats(opts: dict) -> int:
    graph = _load_graph(opts)
    counts = graph_store.annual_counts(graph)
    lines = ["year,count"] + [f"{year},{count}" for year, count in counts]
    text = "\n".join(lines) + "\n"
    out = _out_dir(opts)
    _emit(text, out, "annual_counts.csv")
    if opts.get("plot"):
        if out is None:
            raise UsageError("--plot requires --out")
        from . import plots
        plots.plot_annual_counts(counts, out / "annual_counts.svg")
    return 0


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "kqi": cmd_kqi,
    "rank": cmd_rank,
    "laws": cmd_laws,
    "layout": cmd_layout,
    "topictree": cmd_topictree,
    "stats": cmd_stats,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        opts = _merge_config(args)
        return COMMANDS[args.command](opts)
    except SystemExit as exc:  # argparse --help exits 0 by itself
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (graph_store.GraphDataError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
