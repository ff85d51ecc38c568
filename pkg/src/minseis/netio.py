"""Graph and community-file input/output.

Graph files use a Pajek-style subset::

    % comment
    *Vertices 3
    1 "a"
    2 "b"
    3 "c"
    *Edges
    1 2
    2 3 1.0

Vertex label lines are ignored, ``*Arcs`` is accepted as a synonym of
``*Edges`` and trailing weights are discarded. Community files hold one
``<node_id> <community_id>`` pair per line.
"""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

DATA_ENV = "MINSEIS_DATA"


class GraphFormatError(ValueError):
    """Malformed graph file; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class CommunityValidationError(ValueError):
    """Community assignment inconsistent with its graph."""

    def __init__(self, message: str, offenders: Iterable[int] = ()):
        self.offenders = sorted(offenders)
        super().__init__(message)


@dataclass(frozen=True)
class LoadReport:
    duplicates: int = 0
    self_loops: int = 0
    weights_discarded: int = 0


@dataclass(frozen=True)
class CommunityMap:
    assignments: Mapping[int, int]
    num_communities: int

    def __post_init__(self):
        ids = set(self.assignments.values())
        if ids != set(range(1, self.num_communities + 1)):
            missing = set(range(1, max(ids, default=0) + 1)) - ids
            raise CommunityValidationError(
                f"community ids must be contiguous 1..n, missing {sorted(missing)}",
                missing,
            )


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with 1-based node and edge identifiers.

    Edge ``i`` (1-based) is ``edges[i - 1]`` stored as ``(min, max)``.
    ``community`` holds one label per node (index 0 is node 1) or is
    ``None`` until a community map is attached.
    """

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    community: tuple[int, ...] | None = None
    report: LoadReport = field(default_factory=LoadReport, compare=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_communities(self) -> int:
        return 0 if self.community is None else max(self.community, default=0)

    @cached_property
    def adjacency(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """NodeId -> ((neighbor, edge_id), ...) sorted by neighbor."""
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, self.num_nodes + 1)}
        for eid, (u, v) in enumerate(self.edges, start=1):
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        return {v: tuple(sorted(nbrs)) for v, nbrs in adj.items()}

    def neighbors(self, node: int) -> tuple[int, ...]:
        return tuple(v for v, _ in self.adjacency[node])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-based CSR arrays ``(indptr, indices, edge_index)``; rows sorted by neighbor."""
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        indices = []
        edge_index = []
        for v in range(1, self.num_nodes + 1):
            row = self.adjacency[v]
            indptr[v] = indptr[v - 1] + len(row)
            indices.extend(u - 1 for u, _ in row)
            edge_index.extend(e - 1 for _, e in row)
        return indptr, np.asarray(indices, dtype=np.int64), np.asarray(edge_index, dtype=np.int64)

    def community_array(self) -> np.ndarray:
        if self.community is None:
            return np.ones(self.num_nodes, dtype=np.int64)
        return np.asarray(self.community, dtype=np.int64)

    def with_communities(self, cmap: CommunityMap) -> "Graph":
        validate_communities(cmap, self)
        labels = tuple(cmap.assignments[v] for v in range(1, self.num_nodes + 1))
        return Graph(self.num_nodes, self.edges, labels, self.report)

    def without_edges(self, removed: Iterable[int]) -> "Graph":
        """Copy with the given edge ids dropped; surviving edges are renumbered in order."""
        drop = set(removed)
        kept = tuple(e for i, e in enumerate(self.edges, start=1) if i not in drop)
        return Graph(self.num_nodes, kept, self.community)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.num_nodes, self.edges, self.community) == (
            other.num_nodes, other.edges, other.community)

    def __hash__(self):
        return hash((self.num_nodes, self.edges, self.community))

    def __repr__(self):
        return (f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges}, "
                f"num_communities={self.num_communities})")


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8")
    return source


def load_graph(source) -> Graph:
    """Parse a Pajek-style graph from a path or text stream.

    Duplicate edges keep their first id, self-loops are dropped; both are
    counted in ``graph.report`` and logged as warnings.
    """
    fh = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if fh is not source:
            fh.close()

    num_nodes = None
    section = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    duplicates = self_loops = weights = 0

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("*"):
            head = line.split()
            key = head[0].lower()
            if key == "*vertices":
                if len(head) < 2:
                    raise GraphFormatError("'*Vertices' needs a node count", lineno)
                try:
                    num_nodes = int(head[1])
                except ValueError:
                    raise GraphFormatError(f"bad node count {head[1]!r}", lineno) from None
                if num_nodes < 1:
                    raise GraphFormatError("node count must be positive", lineno)
                section = "vertices"
            elif key in ("*edges", "*arcs"):
                if num_nodes is None:
                    raise GraphFormatError(f"{head[0]} before '*Vertices'", lineno)
                section = "edges"
            else:
                raise GraphFormatError(f"unknown section {head[0]!r}", lineno)
            continue
        if section is None:
            raise GraphFormatError("content before '*Vertices' header", lineno)
        if section == "vertices":
            continue

        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(f"edge line needs two endpoints: {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer endpoint in {line!r}", lineno) from None
        for x in (u, v):
            if not 1 <= x <= num_nodes:
                raise GraphFormatError(f"node {x} outside 1..{num_nodes}", lineno)
        if len(parts) > 2:
            weights += 1
        if u == v:
            self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append(key)

    if num_nodes is None:
        raise GraphFormatError("missing '*Vertices' header", len(lines) or 1)
    if section != "edges":
        raise GraphFormatError("missing '*Edges' section", len(lines) or 1)
    if not edges:
        raise GraphFormatError("empty edge section", len(lines) or 1)

    if duplicates or self_loops:
        logger.warning("collapsed %d duplicate edge(s), dropped %d self-loop(s)",
                       duplicates, self_loops)
    return Graph(num_nodes, tuple(edges), None, LoadReport(duplicates, self_loops, weights))


def write_graph(graph: Graph, dest=None) -> str:
    """Serialize in the same dialect ``load_graph`` reads; returns the text."""
    buf = io.StringIO()
    buf.write(f"*Vertices {graph.num_nodes}\n*Edges\n")
    for u, v in graph.edges:
        buf.write(f"{u} {v}\n")
    text = buf.getvalue()
    if dest is not None:
        Path(dest).write_text(text, encoding="utf-8")
    return text


def read_community_map(source) -> CommunityMap:
    fh = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if fh is not source:
            fh.close()
    assignments: dict[int, int] = {}
    repeated = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(("%", "#")):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise GraphFormatError(f"expected '<node> <community>', got {line!r}", lineno)
        try:
            node, comm = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer field in {line!r}", lineno) from None
        if node in assignments:
            repeated.append(node)
        assignments[node] = comm
    if repeated:
        raise CommunityValidationError(f"nodes assigned more than once: {sorted(repeated)}", repeated)
    ids = set(assignments.values())
    n_comm = max(ids, default=0)
    if not assignments or ids != set(range(1, n_comm + 1)):
        gaps = sorted(set(range(1, n_comm + 1)) - ids)
        raise CommunityValidationError(f"community ids must be contiguous from 1; missing {gaps}", gaps)
    return CommunityMap(assignments, n_comm)


def validate_communities(cmap: CommunityMap, graph: Graph) -> None:
    nodes = set(range(1, graph.num_nodes + 1))
    missing = nodes - cmap.assignments.keys()
    unknown = cmap.assignments.keys() - nodes
    if missing:
        raise CommunityValidationError(f"nodes without community: {sorted(missing)}", missing)
    if unknown:
        raise CommunityValidationError(f"assignments for unknown nodes: {sorted(unknown)}", unknown)


def load_communities(source, graph: Graph) -> CommunityMap:
    """Read a community file and check it covers ``graph`` exactly once per node."""
    cmap = read_community_map(source)
    validate_communities(cmap, graph)
    return cmap


def load_instance_files(graph_path, community_path) -> Graph:
    graph = load_graph(graph_path)
    return graph.with_communities(load_communities(community_path, graph))


# ---------------------------------------------------------------- bundled instances

@dataclass(frozen=True)
class InstanceInfo:
    name: str
    graph_file: str
    community_file: str
    nodes: int
    edges: int
    communities: int


def _manifest_text() -> str:
    return resources.files("minseis").joinpath("data/instances.csv").read_text(encoding="utf-8")


def instance_manifest() -> dict[str, InstanceInfo]:
    """Reference sizes of the benchmark networks, keyed by lower-case name."""
    rows = csv.DictReader(io.StringIO(_manifest_text()))
    return {
        r["name"]: InstanceInfo(r["name"], r["graph_file"], r["community_file"],
                                int(r["nodes"]), int(r["edges"]), int(r["communities"]))
        for r in rows
    }


def instance_dirs() -> list[Path]:
    """Search path for instance files: ``$MINSEIS_DATA`` entries, then the package data."""
    dirs = [Path(p) for p in os.environ.get(DATA_ENV, "").split(os.pathsep) if p]
    dirs.append(Path(str(resources.files("minseis").joinpath("data"))))
    return dirs


def _find(filename: str) -> Path | None:
    for d in instance_dirs():
        p = d / filename
        if p.is_file():
            return p
    return None


def instance_paths(name: str) -> tuple[Path, Path]:
    info = instance_manifest().get(name.lower())
    if info is None:
        raise KeyError(f"unknown instance {name!r}")
    g, c = _find(info.graph_file), _find(info.community_file)
    if g is None or c is None:
        absent = [f for f, p in ((info.graph_file, g), (info.community_file, c)) if p is None]
        raise FileNotFoundError(
            f"instance {info.name!r}: {', '.join(absent)} not found in "
            f"{[str(d) for d in instance_dirs()]}; set ${DATA_ENV} to a directory holding them")
    return g, c


def available_instances() -> list[str]:
    out = []
    for name in instance_manifest():
        try:
            instance_paths(name)
        except FileNotFoundError:
            continue
        out.append(name)
    return out


def load_instance(name: str) -> Graph:
    """Load a benchmark network with its communities attached."""
    return load_instance_files(*instance_paths(name))
