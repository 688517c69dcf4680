"""In-memory citation graph store with file import/export.

A citation graph is a directed graph over papers: an edge (citing, cited)
means the first paper references the second.  The store keeps per-paper
metadata (publication date, ordered author list, affiliation, country,
venue, fields), a deduplicated edge set, and the undirected degree view
used by the entropy computations.

File formats
------------
Nodes: CSV (header row) or JSONL, one paper per row/line with keys
    paper_id, date, author_ids, affiliation_id, country, venue_id, field_ids
`date` is ISO-8601, year-only accepted.  `author_ids` / `field_ids` are
pipe-separated in CSV and may be lists in JSONL.  Unknown columns are
ignored.  Edges: CSV with header "citing_id,cited_id".
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date as _date
from pathlib import Path
from typing import Iterable, Optional

NODE_COLUMNS = [
    "paper_id", "date", "author_ids", "affiliation_id",
    "country", "venue_id", "field_ids",
]

YEAR_MIN = 1000
YEAR_MAX = 3000


class GraphDataError(ValueError):
    """Malformed or inconsistent input data; carries the offending line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PaperRecord:
    """One paper. `year` is None only for stub records (unknown date)."""

    paper_id: str
    year: Optional[int] = None
    full_date: Optional[_date] = None
    author_ids: tuple[str, ...] = ()
    affiliation_id: Optional[str] = None
    country: Optional[str] = None
    venue_id: Optional[str] = None
    field_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.paper_id:
            raise GraphDataError("empty paper_id")
        if self.year is not None and not (YEAR_MIN <= self.year <= YEAR_MAX):
            raise GraphDataError(
                f"paper {self.paper_id}: year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if self.full_date is not None and self.year is not None \
                and self.full_date.year != self.year:
            raise GraphDataError(f"paper {self.paper_id}: date/year mismatch")
        if len(set(self.author_ids)) != len(self.author_ids):
            raise GraphDataError(f"paper {self.paper_id}: duplicate author ids")

    @property
    def first_author(self) -> Optional[str]:
        return self.author_ids[0] if self.author_ids else None

    def date_key(self) -> tuple:
        """Total order used for chronological tie-breaking; unknown dates sort first."""
        if self.year is None:
            return (-(10 ** 9), 1, 1)
        if self.full_date is not None:
            return (self.full_date.year, self.full_date.month, self.full_date.day)
        return (self.year, 1, 1)


@dataclass(frozen=True)
class IngestOptions:
    """`dangling` is what to do with edges naming unknown papers: reject | stub."""

    dangling: str = "reject"

    def __post_init__(self):
        if self.dangling not in ("reject", "stub"):
            raise ValueError(f"unknown dangling policy: {self.dangling!r}")


@dataclass
class IngestReport:
    nodes: int = 0
    edges: int = 0
    dropped_self_loops: int = 0
    dropped_duplicate_edges: int = 0
    stubbed_nodes: int = 0

    def as_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "dropped_self_loops": self.dropped_self_loops,
            "dropped_duplicate_edges": self.dropped_duplicate_edges,
            "stubbed_nodes": self.stubbed_nodes,
        }


class CitationGraph:
    """Immutable directed citation graph with a deduplicated undirected view.

    Do not mutate after construction; all analytics code relies on this and
    shares instances freely across threads.
    """

    def __init__(self, records: dict[str, PaperRecord],
                 edges: Iterable[tuple[str, str]],
                 ingest_report: Optional[IngestReport] = None):
        self.records: dict[str, PaperRecord] = dict(records)
        edge_set = set()
        for citing, cited in edges:
            if citing not in self.records:
                raise GraphDataError(f"edge endpoint {citing!r} not in records")
            if cited not in self.records:
                raise GraphDataError(f"edge endpoint {cited!r} not in records")
            if citing == cited:
                raise GraphDataError(f"self-loop on {citing!r} (drop before construction)")
            edge_set.add((citing, cited))
        self.edges: frozenset[tuple[str, str]] = frozenset(edge_set)

        self.out_neighbors: dict[str, tuple[str, ...]] = {}
        self.in_neighbors: dict[str, tuple[str, ...]] = {}
        out_tmp: dict[str, list[str]] = {p: [] for p in self.records}
        in_tmp: dict[str, list[str]] = {p: [] for p in self.records}
        und_tmp: dict[str, set[str]] = {p: set() for p in self.records}
        for citing, cited in edge_set:
            out_tmp[citing].append(cited)
            in_tmp[cited].append(citing)
            und_tmp[citing].add(cited)
            und_tmp[cited].add(citing)
        for p in self.records:
            self.out_neighbors[p] = tuple(sorted(out_tmp[p]))
            self.in_neighbors[p] = tuple(sorted(in_tmp[p]))
        self.undirected_neighbors: dict[str, tuple[str, ...]] = {
            p: tuple(sorted(und_tmp[p])) for p in self.records}
        self.undirected_degree: dict[str, int] = {
            p: len(self.undirected_neighbors[p]) for p in self.records}
        self.ingest_report = ingest_report

    # -- basic facts ------------------------------------------------------

    def __len__(self) -> int:
        return len(self.records)

    def node_ids(self) -> list[str]:
        return sorted(self.records)

    @property
    def undirected_edge_count(self) -> int:
        return sum(self.undirected_degree.values()) // 2

    @property
    def volume(self) -> int:
        """Sum of undirected degrees; twice the undirected edge count."""
        return sum(self.undirected_degree.values())

    def undirected_edges(self) -> list[tuple[str, str]]:
        """Deduplicated undirected edge list, each pair ordered and sorted."""
        seen = set()
        for citing, cited in self.edges:
            a, b = (citing, cited) if citing < cited else (cited, citing)
            seen.add((a, b))
        return sorted(seen)

    def year_of(self, paper_id: str) -> Optional[int]:
        return self.records[paper_id].year

    def year_range(self) -> Optional[tuple[int, int]]:
        years = [r.year for r in self.records.values() if r.year is not None]
        if not years:
            return None
        return min(years), max(years)

    def weighted_adjacency(self) -> dict[str, dict[str, float]]:
        """Undirected unit-weight adjacency, the shape community code consumes."""
        return {p: {q: 1.0 for q in self.undirected_neighbors[p]}
                for p in self.records}


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------

def _parse_date_field(raw: str, line: int) -> tuple[Optional[int], Optional[_date]]:
    raw = raw.strip()
    if not raw:
        return None, None
    if len(raw) == 4 and raw.isdigit():
        year = int(raw)
        if not (YEAR_MIN <= year <= YEAR_MAX):
            raise GraphDataError(f"year {year} outside [{YEAR_MIN}, {YEAR_MAX}]", line)
        return year, None
    try:
        full = _date.fromisoformat(raw)
    except ValueError as exc:
        raise GraphDataError(f"bad date {raw!r}: {exc}", line) from None
    if not (YEAR_MIN <= full.year <= YEAR_MAX):
        raise GraphDataError(f"year {full.year} outside [{YEAR_MIN}, {YEAR_MAX}]", line)
    return full.year, full


def _split_ids(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value if str(v))
    value = str(value).strip()
    if not value:
        return ()
    return tuple(part for part in value.split("|") if part)


def _record_from_mapping(row: dict, line: int) -> PaperRecord:
    paper_id = str(row.get("paper_id") or "").strip()
    if not paper_id:
        raise GraphDataError("missing paper_id", line)
    date_raw = row.get("date")
    if isinstance(date_raw, (int, float)):
        date_raw = str(int(date_raw))
    year, full = _parse_date_field(str(date_raw or ""), line)

    def opt(key):
        v = row.get(key)
        if v is None:
            return None
        v = str(v).strip()
        return v or None

    try:
        return PaperRecord(
            paper_id=paper_id,
            year=year,
            full_date=full,
            author_ids=_split_ids(row.get("author_ids")),
            affiliation_id=opt("affiliation_id"),
            country=opt("country"),
            venue_id=opt("venue_id"),
            field_ids=_split_ids(row.get("field_ids")),
        )
    except GraphDataError as exc:
        raise GraphDataError(str(exc), line) from None


def _iter_node_rows(source) -> Iterable[tuple[int, dict]]:
    """Yield (line_number, mapping) from a CSV or JSONL nodes source."""
    text, name = _read_source(source)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        for lineno, raw in enumerate(text.splitlines(), start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                row = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise GraphDataError(f"bad JSON in {name}: {exc}", lineno) from None
            if not isinstance(row, dict):
                raise GraphDataError(f"expected JSON object in {name}", lineno)
            yield lineno, row
    else:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or "paper_id" not in reader.fieldnames:
            raise GraphDataError(f"{name}: nodes CSV needs a paper_id column", 1)
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row


def _read_source(source) -> tuple[str, str]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        return path.read_text(encoding="utf-8"), str(path)
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", "<stream>")
    raise TypeError(f"unsupported source type: {type(source)!r}")


def _iter_edge_rows(source) -> Iterable[tuple[int, str, str]]:
    text, name = _read_source(source)
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return
    start = 0
    if [c.strip() for c in rows[0][:2]] == ["citing_id", "cited_id"]:
        start = 1
    for idx in range(start, len(rows)):
        row = rows[idx]
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 2 or not row[0].strip() or not row[1].strip():
            raise GraphDataError(f"{name}: edge row needs citing_id,cited_id", idx + 1)
        yield idx + 1, row[0].strip(), row[1].strip()


def ingest(nodes_source, edges_source,
           options: IngestOptions = IngestOptions()) -> CitationGraph:
    """Load and validate a citation graph from nodes/edges sources.

    Self-loops and duplicate edges are dropped (counted in the report
    attached as ``graph.ingest_report``).  Edges naming unknown papers
    are an error under the "reject" policy; under "stub" the unknown
    endpoint becomes a record with unknown date.
    """
    records: dict[str, PaperRecord] = {}
    for lineno, row in _iter_node_rows(nodes_source):
        rec = _record_from_mapping(row, lineno)
        if rec.paper_id in records:
            raise GraphDataError(f"duplicate paper_id {rec.paper_id!r}", lineno)
        records[rec.paper_id] = rec

    report = IngestReport()
    edges: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for lineno, citing, cited in _iter_edge_rows(edges_source):
        if citing == cited:
            report.dropped_self_loops += 1
            continue
        for endpoint in (citing, cited):
            if endpoint not in records:
                if options.dangling == "reject":
                    raise GraphDataError(
                        f"edge references unknown paper {endpoint!r}", lineno)
                records[endpoint] = PaperRecord(paper_id=endpoint)
                report.stubbed_nodes += 1
        if (citing, cited) in seen:
            report.dropped_duplicate_edges += 1
            continue
        seen.add((citing, cited))
        edges.append((citing, cited))

    report.nodes = len(records)
    report.edges = len(edges)
    return CitationGraph(records, edges, ingest_report=report)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _date_str(rec: PaperRecord) -> str:
    if rec.full_date is not None:
        return rec.full_date.isoformat()
    if rec.year is not None:
        return str(rec.year)
    return ""


def export_nodes_csv(graph: CitationGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(NODE_COLUMNS)
        for pid in graph.node_ids():
            rec = graph.records[pid]
            writer.writerow([
                rec.paper_id,
                _date_str(rec),
                "|".join(rec.author_ids),
                rec.affiliation_id or "",
                rec.country or "",
                rec.venue_id or "",
                "|".join(rec.field_ids),
            ])


def export_nodes_jsonl(graph: CitationGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pid in graph.node_ids():
            rec = graph.records[pid]
            row = {
                "paper_id": rec.paper_id,
                "date": _date_str(rec),
                "author_ids": list(rec.author_ids),
                "affiliation_id": rec.affiliation_id,
                "country": rec.country,
                "venue_id": rec.venue_id,
                "field_ids": list(rec.field_ids),
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def export_edges_csv(graph: CitationGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["citing_id", "cited_id"])
        for citing, cited in sorted(graph.edges):
            writer.writerow([citing, cited])


# ---------------------------------------------------------------------------
# Snapshots and statistics
# ---------------------------------------------------------------------------

def snapshot(graph: CitationGraph, year: int) -> CitationGraph:
    """Induced subgraph on papers published up to and including `year`.

    Records with unknown date are always retained: a cited paper must
    predate its citers, so undated stubs behave as arbitrarily old.
    """
    keep = {pid for pid, rec in graph.records.items()
            if rec.year is None or rec.year <= year}
    records = {pid: graph.records[pid] for pid in keep}
    edges = [(a, b) for a, b in graph.edges if a in keep and b in keep]
    return CitationGraph(records, edges)


def temporal_violations(graph: CitationGraph) -> list[tuple[str, str]]:
    """Edges whose citing paper is strictly older than the paper it cites."""
    bad = []
    for citing, cited in graph.edges:
        y_citing = graph.records[citing].year
        y_cited = graph.records[cited].year
        if y_citing is not None and y_cited is not None and y_citing < y_cited:
            bad.append((citing, cited))
    return sorted(bad)


def annual_counts(graph: CitationGraph) -> list[tuple[int, int]]:
    """(year, papers published) for every year in the graph's range.

    Years with no papers are reported with count 0; undated records are
    not counted.
    """
    years = [r.year for r in graph.records.values() if r.year is not None]
    if not years:
        return []
    counts: dict[int, int] = {}
    for y in years:
        counts[y] = counts.get(y, 0) + 1
    lo, hi = min(years), max(years)
    return [(y, counts.get(y, 0)) for y in range(lo, hi + 1)]
