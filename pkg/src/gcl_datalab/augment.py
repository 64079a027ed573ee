"""Graph augmentations realized as compositions of edit operations.

Each augmentation family modifies exactly its integer budget of elements
(floor of strength times the node or edge count), and every application
returns a replayable edit path, so the edit distance between a parent and
any of its augmentations is bounded by the budget under unit costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graphs import (
    AttributedGraph,
    GraphError,
    is_connected,
)

MASK_SYMBOL = -1

NODE_DROP = "NodeDrop"
EDGE_PERTURB = "EdgePerturb"
ATTR_MASK = "AttrMask"
SUBGRAPH = "Subgraph"
CONTENT_EDGE_DROP = "ContentAwareEdgeDrop"

FAMILIES = (NODE_DROP, EDGE_PERTURB, ATTR_MASK, SUBGRAPH, CONTENT_EDGE_DROP)
# families whose budget is indexed by |V| rather than |E|
NODE_INDEXED = {NODE_DROP, ATTR_MASK, SUBGRAPH}

OP_NODE_DELETION = "NodeDeletion"
OP_NODE_INSERTION = "NodeInsertion"
OP_EDGE_DELETION = "EdgeDeletion"
OP_EDGE_ADDITION = "EdgeAddition"
OP_FEATURE_REPLACEMENT = "FeatureReplacement"


class CapExceededError(GraphError):
    """Enumeration refused: the counted bound exceeds the caller's cap."""

    def __init__(self, bound: int, cap: int):
        super().__init__(f"augmentation set size {bound} exceeds cap {cap}")
        self.bound = bound
        self.cap = cap


@dataclass(frozen=True)
class EditOp:
    """One elementary edit in current-graph coordinates.

    NodeDeletion removes the node and its incident edges (and re-indexes the
    tail) at unit cost; NodeInsertion appends a node and may bundle edges to
    existing nodes, also at unit cost, so deletion and insertion are exact
    mutual inverses and edit paths reverse cost-free.
    """

    kind: str
    node: int | None = None
    edge: tuple[int, int] | None = None
    attrs: tuple[int, ...] | None = None
    attach: tuple[int, ...] = ()
    cost: float = 1.0

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.node is not None:
            out["node"] = self.node
        if self.edge is not None:
            out["edge"] = list(self.edge)
        if self.attrs is not None:
            out["attrs"] = list(self.attrs)
        if self.attach:
            out["attach"] = list(self.attach)
        if self.cost != 1.0:
            out["cost"] = self.cost
        return out

    @staticmethod
    def from_dict(d: dict) -> "EditOp":
        return EditOp(
            kind=d["kind"],
            node=d.get("node"),
            edge=tuple(d["edge"]) if "edge" in d else None,
            attrs=tuple(d["attrs"]) if "attrs" in d else None,
            attach=tuple(d.get("attach", ())),
            cost=d.get("cost", 1.0),
        )


def apply_edit(g: AttributedGraph, op: EditOp) -> AttributedGraph:
    edges = set(g.edges)
    attrs = list(g.node_attrs)
    if op.kind == OP_NODE_DELETION:
        v = op.node
        if v is None or not (0 <= v < g.n):
            raise GraphError(f"NodeDeletion target {v} invalid for n={g.n}")
        edges = {
            (u - (u > v), w - (w > v))
            for u, w in edges
            if u != v and w != v
        }
        del attrs[v]
        return AttributedGraph.build(g.n - 1, edges, attrs, g.graph_id)
    if op.kind == OP_NODE_INSERTION:
        if op.attrs is None:
            raise GraphError("NodeInsertion requires attrs")
        for t in op.attach:
            if not (0 <= t < g.n):
                raise GraphError(f"NodeInsertion attach target {t} invalid")
        attrs.append(tuple(op.attrs))
        for t in op.attach:
            edges.add((t, g.n))
        return AttributedGraph.build(g.n + 1, edges, attrs, g.graph_id)
    if op.kind == OP_EDGE_DELETION:
        e = tuple(sorted(op.edge))  # type: ignore[arg-type]
        if e not in edges:
            raise GraphError(f"EdgeDeletion of absent edge {e}")
        edges.discard(e)
        return AttributedGraph.build(g.n, edges, attrs, g.graph_id)
    if op.kind == OP_EDGE_ADDITION:
        e = tuple(sorted(op.edge))  # type: ignore[arg-type]
        if e[0] == e[1] or e in edges:
            raise GraphError(f"EdgeAddition of invalid/present edge {e}")
        if not (0 <= e[0] < g.n and 0 <= e[1] < g.n):
            raise GraphError(f"EdgeAddition endpoint out of range {e}")
        edges.add(e)
        return AttributedGraph.build(g.n, edges, attrs, g.graph_id)
    if op.kind == OP_FEATURE_REPLACEMENT:
        v = op.node
        if v is None or not (0 <= v < g.n) or op.attrs is None:
            raise GraphError(f"FeatureReplacement target {v} invalid")
        attrs[v] = tuple(op.attrs)
        return AttributedGraph.build(g.n, edges, attrs, g.graph_id)
    raise GraphError(f"unknown edit kind {op.kind}")


def replay_edits(g: AttributedGraph, edits: list[EditOp]) -> AttributedGraph:
    for op in edits:
        g = apply_edit(g, op)
    return g


@dataclass(frozen=True)
class AugmentationSpec:
    family: str
    strength: float  # fraction of nodes/edges the family may modify

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown augmentation family {self.family!r}")
        if not (0.0 <= self.strength <= 1.0):
            raise GraphError(f"strength {self.strength} outside [0, 1]")


@dataclass(frozen=True)
class AugmentationRecord:
    graph: AttributedGraph
    parent_id: str
    spec: AugmentationSpec
    delta: int
    seed: int
    edit_path: tuple[EditOp, ...]

    def to_dict(self) -> dict:
        g = self.graph
        return {
            "id": g.graph_id,
            "parent": self.parent_id,
            "family": self.spec.family,
            "gamma": self.spec.strength,
            "delta": self.delta,
            "seed": self.seed,
            "n": g.n,
            "edges": [list(e) for e in g.sorted_edges()],
            "attrs": [list(a) for a in g.node_attrs],
            "edits": [op.to_dict() for op in self.edit_path],
        }


def allowable_budget(g: AttributedGraph, spec: AugmentationSpec) -> int:
    """Integer edit budget: floor(strength * |V|) or floor(strength * |E|)."""
    base = g.n if spec.family in NODE_INDEXED else g.num_edges
    return int(math.floor(spec.strength * base))


def style_edges(g: AttributedGraph, content_mask: frozenset[int]) -> list[tuple[int, int]]:
    """Edges not induced by the content mask (at least one style endpoint)."""
    return [e for e in g.sorted_edges() if e[0] not in content_mask or e[1] not in content_mask]


def _child_id(parent_id: str, seed: int) -> str:
    return f"{parent_id}#{seed & 0xFFFFFFFFFFFFFFFF:016x}"


def apply(
    g: AttributedGraph,
    spec: AugmentationSpec,
    seed: int,
    content_mask: frozenset[int] | None = None,
) -> AugmentationRecord:
    """Apply one augmentation; pure function of (g, spec, seed, mask)."""
    delta = allowable_budget(g, spec)
    rng = np.random.default_rng(seed)
    edits: list[EditOp] = []

    if spec.family == NODE_DROP:
        chosen = _choose(rng, list(range(g.n)), delta)
        edits = [EditOp(OP_NODE_DELETION, node=v) for v in sorted(chosen, reverse=True)]
    elif spec.family == ATTR_MASK:
        arity = len(g.node_attrs[0]) if g.n else 0
        mask_vec = (MASK_SYMBOL,) * arity
        chosen = _choose(rng, list(range(g.n)), delta)
        edits = [
            EditOp(OP_FEATURE_REPLACEMENT, node=v, attrs=mask_vec) for v in sorted(chosen)
        ]
    elif spec.family == EDGE_PERTURB:
        edits = _edge_perturb_path(g, delta, rng)
    elif spec.family == SUBGRAPH:
        if not is_connected(g):
            raise GraphError("Subgraph augmentation requires a connected graph")
        retained = _random_walk_retained(g, g.n - delta, rng)
        dropped = sorted(set(range(g.n)) - retained, reverse=True)
        edits = [EditOp(OP_NODE_DELETION, node=v) for v in dropped]
    elif spec.family == CONTENT_EDGE_DROP:
        if content_mask is None:
            raise GraphError("ContentAwareEdgeDrop requires a content mask")
        candidates = style_edges(g, content_mask)
        k = min(delta, len(candidates))
        chosen_edges = _choose(rng, candidates, k)
        edits = [EditOp(OP_EDGE_DELETION, edge=e) for e in sorted(chosen_edges)]
    else:  # pragma: no cover - guarded by AugmentationSpec
        raise GraphError(f"unknown family {spec.family}")

    out = replay_edits(g, edits)
    return AugmentationRecord(
        graph=out.with_id(_child_id(g.graph_id, seed)),
        parent_id=g.graph_id,
        spec=spec,
        delta=delta,
        seed=seed,
        edit_path=tuple(edits),
    )


def _choose(rng: np.random.Generator, items: list, k: int) -> list:
    if k <= 0:
        return []
    idx = rng.choice(len(items), size=k, replace=False)
    return [items[i] for i in sorted(int(i) for i in idx)]


def _edge_perturb_path(
    g: AttributedGraph, delta: int, rng: np.random.Generator
) -> list[EditOp]:
    """Exactly delta ops, each a deletion or an addition of an untouched pair.

    Never re-touching a pair keeps the path minimal, so its length witnesses
    the edit distance. An untouched pair always admits exactly one op, and
    delta <= |E| <= C(n,2), so the loop cannot starve.
    """
    present = set(g.edges)
    touched: set[tuple[int, int]] = set()
    edits = []
    for _ in range(delta):
        delete = bool(rng.integers(0, 2))
        del_cands = sorted(e for e in present if e not in touched)
        add_cands = [
            (u, v)
            for u in range(g.n)
            for v in range(u + 1, g.n)
            if (u, v) not in present and (u, v) not in touched
        ]
        if delete and del_cands:
            e = del_cands[int(rng.integers(0, len(del_cands)))]
            present.discard(e)
            edits.append(EditOp(OP_EDGE_DELETION, edge=e))
        elif add_cands:
            e = add_cands[int(rng.integers(0, len(add_cands)))]
            present.add(e)
            edits.append(EditOp(OP_EDGE_ADDITION, edge=e))
        elif del_cands:
            e = del_cands[int(rng.integers(0, len(del_cands)))]
            present.discard(e)
            edits.append(EditOp(OP_EDGE_DELETION, edge=e))
        else:  # pragma: no cover - impossible while delta <= C(n,2)
            break
        touched.add(edits[-1].edge)  # type: ignore[arg-type]
    return edits


def _random_walk_retained(
    g: AttributedGraph, target: int, rng: np.random.Generator
) -> set[int]:
    adj = g.neighbors()
    start = int(rng.integers(0, g.n))
    retained = {start}
    pos = start
    while len(retained) < target:
        nbrs = adj[pos]
        pos = nbrs[int(rng.integers(0, len(nbrs)))]
        retained.add(pos)
    return retained


def count_augmentations_upper_bound(
    g: AttributedGraph,
    spec: AugmentationSpec,
    content_mask: frozenset[int] | None = None,
) -> int:
    """Exact binomial-sum bound on the augmentation-set size.

    Node-subset families sum C(|V|, j); edge families sum C(|E|, j) over the
    deletion-only analysis (added-edge choices for EdgePerturb have no closed
    count and are excluded by convention). A zero budget counts the identity.
    """
    delta = allowable_budget(g, spec)
    if delta == 0:
        return 1
    if spec.family in NODE_INDEXED:
        base = g.n
    elif spec.family == CONTENT_EDGE_DROP:
        if content_mask is None:
            raise GraphError("ContentAwareEdgeDrop requires a content mask")
        base = len(style_edges(g, content_mask))
        delta = min(delta, base)
        if delta == 0:
            return 1
    else:
        base = g.num_edges
    return sum(math.comb(base, j) for j in range(1, delta + 1))


def enumerate_augmentations(
    g: AttributedGraph,
    spec: AugmentationSpec,
    cap: int,
    content_mask: frozenset[int] | None = None,
) -> list[AugmentationRecord]:
    """Exhaustive labeled outcomes, one record per distinct edit choice.

    Choices that happen to produce equal or isomorphic graphs are kept as
    separate records; the list length therefore matches the counting bound
    exactly for the node-subset families. EdgePerturb enumerates deletion
    subsets only, mirroring the count; Subgraph keeps only choices whose
    retained node set is connected (the bound is then an over-count).
    """
    bound = count_augmentations_upper_bound(g, spec, content_mask)
    if bound > cap:
        raise CapExceededError(bound, cap)
    delta = allowable_budget(g, spec)

    def record(edits: list[EditOp], index: int) -> AugmentationRecord:
        return AugmentationRecord(
            graph=replay_edits(g, edits).with_id(f"{g.graph_id}#e{index}"),
            parent_id=g.graph_id,
            spec=spec,
            delta=delta,
            seed=index,
            edit_path=tuple(edits),
        )

    out: list[AugmentationRecord] = []
    if delta == 0:
        return [record([], 0)]

    if spec.family in (NODE_DROP, SUBGRAPH):
        idx = 0
        for j in range(1, delta + 1):
            for subset in combinations(range(g.n), j):
                if spec.family == SUBGRAPH:
                    remaining = sorted(set(range(g.n)) - set(subset))
                    if not remaining or not _nodes_connected(g, remaining):
                        continue
                edits = [
                    EditOp(OP_NODE_DELETION, node=v) for v in sorted(subset, reverse=True)
                ]
                out.append(record(edits, idx))
                idx += 1
        return out
    if spec.family == ATTR_MASK:
        arity = len(g.node_attrs[0]) if g.n else 0
        mask_vec = (MASK_SYMBOL,) * arity
        idx = 0
        for j in range(1, delta + 1):
            for subset in combinations(range(g.n), j):
                edits = [
                    EditOp(OP_FEATURE_REPLACEMENT, node=v, attrs=mask_vec)
                    for v in subset
                ]
                out.append(record(edits, idx))
                idx += 1
        return out
    if spec.family == EDGE_PERTURB:
        all_edges = g.sorted_edges()
        idx = 0
        for j in range(1, delta + 1):
            for subset in combinations(all_edges, j):
                edits = [EditOp(OP_EDGE_DELETION, edge=e) for e in subset]
                out.append(record(edits, idx))
                idx += 1
        return out
    if spec.family == CONTENT_EDGE_DROP:
        assert content_mask is not None  # checked by the counting call
        cands = style_edges(g, content_mask)
        d = min(delta, len(cands))
        idx = 0
        for j in range(1, d + 1):
            for subset in combinations(cands, j):
                edits = [EditOp(OP_EDGE_DELETION, edge=e) for e in subset]
                out.append(record(edits, idx))
                idx += 1
        return out
    raise GraphError(f"unknown family {spec.family}")  # pragma: no cover


def _nodes_connected(g: AttributedGraph, nodes: list[int]) -> bool:
    keep = set(nodes)
    adj = g.neighbors()
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w in keep and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(keep)
