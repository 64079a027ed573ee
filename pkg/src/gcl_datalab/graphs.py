"""Attributed-graph core: representation, isomorphism screening, serialization.

Graphs are simple and undirected with categorical node-attribute vectors.
Everything here is immutable and pure, so graphs can be shared freely across
workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

ISO_SIZE_LIMIT = 16

Edge = tuple[int, int]
AttrVector = tuple[int, ...]


class GraphError(ValueError):
    """Invalid graph construction or operation."""


class RecordParseError(ValueError):
    """A serialized record is malformed; `field` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class IsomorphismSizeError(GraphError):
    """Exact isomorphism search refused; graph exceeds the size limit."""


def _normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class AttributedGraph:
    """Undirected simple graph on nodes 0..n-1 with categorical attributes."""

    n: int
    edges: frozenset[Edge]
    node_attrs: tuple[AttrVector, ...]
    graph_id: str = ""

    def __post_init__(self):
        if self.n < 0:
            raise GraphError(f"negative node count {self.n}")
        if len(self.node_attrs) != self.n:
            raise GraphError(
                f"attrs length {len(self.node_attrs)} != node count {self.n}"
            )
        arities = {len(a) for a in self.node_attrs}
        if len(arities) > 1:
            raise GraphError(f"mixed attribute arities {sorted(arities)}")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop ({u},{v})")
            if u > v:
                raise GraphError(f"edge ({u},{v}) not stored smaller-endpoint-first")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u},{v}) endpoint out of range 0..{self.n - 1}")

    @staticmethod
    def build(
        n: int,
        edges: Iterable[Sequence[int]],
        node_attrs: Sequence[Sequence[int]] | None = None,
        graph_id: str = "",
    ) -> "AttributedGraph":
        """Construct from loose edge/attr containers, normalizing edge order."""
        if node_attrs is None:
            node_attrs = [(0,)] * n
        return AttributedGraph(
            n=n,
            edges=frozenset(_normalize_edge(int(u), int(v)) for u, v in edges),
            node_attrs=tuple(tuple(int(x) for x in a) for a in node_attrs),
            graph_id=graph_id,
        )

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize_edge(u, v) in self.edges

    def with_id(self, graph_id: str) -> "AttributedGraph":
        return AttributedGraph(self.n, self.edges, self.node_attrs, graph_id)

    def structure_key(self) -> tuple:
        """Node-order-sensitive identity key (ignores graph_id)."""
        return (self.n, tuple(self.sorted_edges()), self.node_attrs)


@dataclass(frozen=True)
class LabeledGraph:
    """A class-labeled sample: graph plus content (motif) node mask."""

    graph: AttributedGraph
    class_label: int
    content_mask: frozenset[int] = field(default_factory=frozenset)
    provenance_seed: int = 0

    def __post_init__(self):
        if self.class_label < 0:
            raise GraphError(f"negative class label {self.class_label}")
        bad = [v for v in self.content_mask if not (0 <= v < self.graph.n)]
        if bad:
            raise GraphError(f"content mask nodes {bad} outside node set")


def is_connected(g: AttributedGraph) -> bool:
    if g.n <= 1:
        return True
    adj = g.neighbors()
    seen = [False] * g.n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == g.n


def cut_edges(g: AttributedGraph) -> set[Edge]:
    """Edges whose removal disconnects their component (Tarjan bridges)."""
    adj = g.neighbors()
    disc = [-1] * g.n
    low = [0] * g.n
    out: set[Edge] = set()
    timer = 0
    for root in range(g.n):
        if disc[root] != -1:
            continue
        # iterative DFS; parent edge tracked by node, parallel edges impossible
        stack: list[tuple[int, int, Iterator[int]]] = [(root, -1, iter(adj[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, u, iter(adj[w])))
                    advanced = True
                    break
                elif w != parent:
                    low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] > disc[p]:
                        out.add(_normalize_edge(p, u))
    return out


def induced_subgraph(g: AttributedGraph, nodes: Iterable[int]) -> AttributedGraph:
    """Subgraph induced on `nodes`, re-indexed densely in sorted node order."""
    keep = sorted(set(nodes))
    remap = {v: i for i, v in enumerate(keep)}
    edges = [
        (remap[u], remap[v]) for u, v in g.edges if u in remap and v in remap
    ]
    return AttributedGraph.build(
        len(keep), edges, [g.node_attrs[v] for v in keep], g.graph_id
    )


def connected_components(g: AttributedGraph) -> list[list[int]]:
    adj = g.neighbors()
    seen = [False] * g.n
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------------------
# Weisfeiler-Lehman hashing
# ---------------------------------------------------------------------------


def _h64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def wl_hash(g: AttributedGraph, iterations: int = 3) -> int:
    """64-bit WL digest: isomorphic graphs always collide.

    Per round each node label is rehashed together with the sorted multiset of
    its neighbors' labels; the digest hashes the final label multiset. With
    iterations=0 the digest covers the initial attribute labels only. Distinct
    digests certify non-isomorphism; equal digests are only a screen.
    """
    if iterations < 0:
        raise GraphError("iterations must be >= 0")
    adj = g.neighbors()
    labels = [_h64(repr(a).encode()) for a in g.node_attrs]
    for _ in range(iterations):
        labels = [
            _h64(
                labels[u].to_bytes(8, "big")
                + b"".join(x.to_bytes(8, "big") for x in sorted(labels[w] for w in adj[u]))
            )
            for u in range(g.n)
        ]
    payload = b"".join(x.to_bytes(8, "big") for x in sorted(labels))
    return _h64(len(labels).to_bytes(8, "big") + payload)


# ---------------------------------------------------------------------------
# Exact isomorphism (small graphs)
# ---------------------------------------------------------------------------


def are_isomorphic(g1: AttributedGraph, g2: AttributedGraph) -> bool:
    """Attribute-preserving isomorphism by backtracking; refuses big inputs."""
    if max(g1.n, g2.n) > ISO_SIZE_LIMIT:
        raise IsomorphismSizeError(
            f"isomorphism limited to {ISO_SIZE_LIMIT} nodes, "
            f"got {g1.n} and {g2.n}; use wl_hash screening instead"
        )
    if g1.n != g2.n or g1.num_edges != g2.num_edges:
        return False
    if sorted(g1.node_attrs) != sorted(g2.node_attrs):
        return False
    if sorted(g1.degrees()) != sorted(g2.degrees()):
        return False
    if g1.n == 0:
        return True

    deg1, deg2 = g1.degrees(), g2.degrees()
    adj1 = [set(nbrs) for nbrs in g1.neighbors()]
    adj2 = [set(nbrs) for nbrs in g2.neighbors()]
    # refine candidate sets by (attr, degree); cheap and prunes hard
    cands = [
        [
            v
            for v in range(g2.n)
            if g2.node_attrs[v] == g1.node_attrs[u] and deg2[v] == deg1[u]
        ]
        for u in range(g1.n)
    ]
    if any(not c for c in cands):
        return False
    order = sorted(range(g1.n), key=lambda u: (len(cands[u]), -deg1[u]))
    mapping = [-1] * g1.n
    used = [False] * g2.n

    def extend(pos: int) -> bool:
        if pos == g1.n:
            return True
        u = order[pos]
        for v in cands[u]:
            if used[v]:
                continue
            ok = True
            for w in adj1[u]:
                mv = mapping[w]
                if mv != -1 and mv not in adj2[v]:
                    ok = False
                    break
            if ok:
                # non-edges must also map to non-edges (degree match makes
                # the edge count argument two-sided)
                for w in range(g1.n):
                    mv = mapping[w]
                    if mv != -1 and w not in adj1[u] and mv in adj2[v]:
                        ok = False
                        break
            if ok:
                mapping[u] = v
                used[v] = True
                if extend(pos + 1):
                    return True
                mapping[u] = -1
                used[v] = False
        return False

    return extend(0)


# ---------------------------------------------------------------------------
# Serialization (JSONL dataset format)
# ---------------------------------------------------------------------------


def serialize(sample: LabeledGraph) -> dict:
    """LabeledGraph -> plain record; edges smaller-endpoint-first, sorted."""
    g = sample.graph
    return {
        "id": g.graph_id,
        "label": sample.class_label,
        "n": g.n,
        "edges": [list(e) for e in g.sorted_edges()],
        "attrs": [list(a) for a in g.node_attrs],
        "content_mask": sorted(sample.content_mask),
        "seed": sample.provenance_seed,
    }


def _require(record: dict, field_name: str, kind) -> object:
    if field_name not in record:
        raise RecordParseError(field_name, "missing")
    value = record[field_name]
    if not isinstance(value, kind):
        raise RecordParseError(
            field_name, f"expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def deserialize(record: dict) -> LabeledGraph:
    """Record -> LabeledGraph; malformed input raises RecordParseError."""
    if not isinstance(record, dict):
        raise RecordParseError("record", "expected a JSON object")
    graph_id = _require(record, "id", str)
    label = _require(record, "label", int)
    n = _require(record, "n", int)
    edges = _require(record, "edges", list)
    attrs = _require(record, "attrs", list)
    mask = _require(record, "content_mask", list)
    seed = _require(record, "seed", int)
    try:
        g = AttributedGraph.build(n, edges, attrs, graph_id=graph_id)
    except (GraphError, TypeError, ValueError) as exc:
        raise RecordParseError("edges", str(exc)) from exc
    try:
        return LabeledGraph(
            graph=g,
            class_label=label,
            content_mask=frozenset(int(v) for v in mask),
            provenance_seed=seed,
        )
    except (GraphError, TypeError, ValueError) as exc:
        raise RecordParseError("content_mask", str(exc)) from exc


def write_jsonl(samples: Iterable[LabeledGraph], path: str) -> None:
    """Write samples sorted by id, one JSON record per line."""
    records = sorted((serialize(s) for s in samples), key=lambda r: r["id"])
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":"), sort_keys=True))
            fh.write("\n")


def read_jsonl(path: str) -> list[LabeledGraph]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordParseError("record", f"line {lineno}: {exc}") from exc
            out.append(deserialize(record))
    return out
