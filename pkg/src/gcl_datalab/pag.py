"""Population augmentation graph and the data-centric analysis quantities.

Vertices are augmentation records; the edge weight between two vertices is
the empirical marginal probability that one random natural sample generates
both. Co-occurrence (edit distance within twice the budget) is evaluated
through cached distance brackets: certified-true via concrete edit paths,
certified-false via admissible lower bounds, unknown otherwise. Brackets are
threshold-free, so sweeping the budget upward can only add pairs, which is
what makes the cross-partition count monotone in the budget.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .augment import (
    AugmentationRecord,
    AugmentationSpec,
    allowable_budget,
    apply,
    count_augmentations_upper_bound,
    enumerate_augmentations,
)
from .ged import (
    CostModel,
    UNIT_COSTS,
    ged_interval,
    ged_lower_bound,
)
from .graphs import (
    AttributedGraph,
    GraphError,
    ISO_SIZE_LIMIT,
    LabeledGraph,
    are_isomorphic,
    wl_hash,
)
from .seeds import derive_seed

MODE_EXACT = "uniform-exact"
MODE_SAMPLED = "sampled-estimate"

MEMBERSHIP_PROVENANCE = "provenance"
MEMBERSHIP_STRUCTURAL = "structural"

SOURCE_TRUE_LABELS = "true-labels"
SOURCE_EXTENDED = "majority-rule-extended"
SOURCE_CLUSTERS = "embedding-clusters"


@dataclass(frozen=True)
class PopulationAugmentationGraph:
    vertices: tuple[AugmentationRecord, ...]
    weights: sp.csr_matrix  # symmetric, nonnegative, diagonal allowed
    natural_count: int
    aug_probability_mode: str
    parent_index: tuple[int, ...]  # own parent per vertex
    parent_ids: tuple[str, ...]
    parent_labels: tuple[int, ...]
    parent_graphs: tuple[AttributedGraph, ...]
    parent_budgets: tuple[int, ...]
    generator_sets: tuple[tuple[int, ...], ...]  # parents generating each vertex
    set_sizes: tuple[int, ...]  # |A(parent)| in exact mode, sample count otherwise
    membership: str
    unknown_memberships: int = 0

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def vertex_labels(self) -> list[int]:
        return [self.parent_labels[p] for p in self.parent_index]

    def components(self) -> list[int]:
        n_comp, labels = sp.csgraph.connected_components(
            self.weights, directed=False
        )
        return list(labels)


@dataclass(frozen=True)
class PartitionAssignment:
    assignment: tuple[int, ...]
    r: int
    source: str

    def members(self, i: int) -> list[int]:
        return [v for v, s in enumerate(self.assignment) if s == i]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _iso_classes(graphs: list[AttributedGraph]) -> list[int]:
    """Group graphs into isomorphism classes (screen by invariants + WL)."""
    buckets: dict[tuple, list[int]] = {}
    class_of = [-1] * len(graphs)
    reps: list[int] = []
    for idx, g in enumerate(graphs):
        key = (g.n, g.num_edges, tuple(sorted(g.node_attrs)), wl_hash(g, 3))
        found = -1
        for rep_idx in buckets.get(key, []):
            rep = graphs[rep_idx]
            if g.structure_key() == rep.structure_key():
                found = class_of[rep_idx]
                break
            if g.n <= ISO_SIZE_LIMIT and are_isomorphic(g, rep):
                found = class_of[rep_idx]
                break
        if found < 0:
            found = len(reps)
            reps.append(idx)
            buckets.setdefault(key, []).append(idx)
        class_of[idx] = found
    return class_of


def _distinct_samples(
    parent: LabeledGraph, spec: AugmentationSpec, k: int, seed: int
) -> list[AugmentationRecord]:
    """k applications with distinct edit choices (sampling without replacement)."""
    out: list[AugmentationRecord] = []
    seen: set[tuple] = set()
    attempt = 0
    while len(out) < k and attempt < 20 * k + 50:
        rec = apply(
            parent.graph,
            spec,
            derive_seed(seed, "aug", parent.graph.graph_id, attempt),
            content_mask=parent.content_mask,
        )
        sig = tuple(
            (op.kind, op.node, op.edge, op.attrs) for op in sorted(
                rec.edit_path, key=lambda o: (o.kind, str(o.node), str(o.edge))
            )
        )
        attempt += 1
        if sig in seen:
            continue
        seen.add(sig)
        out.append(rec)
    return out


def _identity_record(parent: LabeledGraph, spec: AugmentationSpec) -> AugmentationRecord:
    return AugmentationRecord(
        graph=parent.graph.with_id(f"{parent.graph.graph_id}#id"),
        parent_id=parent.graph.graph_id,
        spec=spec,
        delta=allowable_budget(parent.graph, spec),
        seed=0,
        edit_path=(),
    )


def _membership_bracket(args):
    child, parent, cost, budget = args
    return ged_interval(child, parent, cost, threshold=budget)


def build_pag(
    samples: list[LabeledGraph],
    spec: AugmentationSpec,
    mode: str = MODE_SAMPLED,
    cap_or_sample_budget: int = 2000,
    seed: int = 0,
    membership: str = MEMBERSHIP_PROVENANCE,
    include_identity: bool = True,
    cost: CostModel = UNIT_COSTS,
    threads: int = 1,
) -> PopulationAugmentationGraph:
    """Assemble the PAG for one augmentation spec over a natural dataset.

    uniform-exact enumerates every augmentation per parent (refusing if the
    counted bound exceeds the cap) and weights pairs by 1/(N*|A|^2) per shared
    generator. sampled-estimate draws a fixed number of distinct augmentations
    per parent and weights by shared-generator counts over k^2*N. Generator
    sets come from provenance plus, under structural membership, edit-distance
    certification of the vertex against every other natural sample's budget.
    """
    if mode not in (MODE_EXACT, MODE_SAMPLED):
        raise GraphError(f"unknown mode {mode!r}")
    if membership not in (MEMBERSHIP_PROVENANCE, MEMBERSHIP_STRUCTURAL):
        raise GraphError(f"unknown membership {membership!r}")
    parents = list(samples)
    n_parents = len(parents)
    parent_budgets = [allowable_budget(s.graph, spec) for s in parents]

    vertices: list[AugmentationRecord] = []
    parent_index: list[int] = []
    set_sizes: list[int] = []  # |A(parent)| (exact) or k (sampled)
    for p_idx, parent in enumerate(parents):
        if mode == MODE_EXACT:
            recs = enumerate_augmentations(
                parent.graph, spec, cap_or_sample_budget, content_mask=parent.content_mask
            )
            set_sizes.append(len(recs))
        else:
            recs = _distinct_samples(
                parent, spec, cap_or_sample_budget, derive_seed(seed, "pag", p_idx)
            )
            if include_identity:
                recs = [_identity_record(parent, spec)] + recs
            set_sizes.append(max(1, len(recs)))
        vertices.extend(recs)
        parent_index.extend([p_idx] * len(recs))

    n_v = len(vertices)
    generator_sets: list[set[int]] = [ {parent_index[i]} for i in range(n_v) ]
    unknown = 0

    if mode == MODE_EXACT:
        # cross-parent generation detected through isomorphism classes
        class_of = _iso_classes([v.graph for v in vertices])
        classes_by_parent: list[set[int]] = [set() for _ in range(n_parents)]
        for i in range(n_v):
            classes_by_parent[parent_index[i]].add(class_of[i])
        for i in range(n_v):
            for q in range(n_parents):
                if class_of[i] in classes_by_parent[q]:
                    generator_sets[i].add(q)
    elif membership == MEMBERSHIP_STRUCTURAL:
        # certify vertex-vs-natural membership: GED within the parent budget
        jobs = []
        job_keys = []
        for i in range(n_v):
            g = vertices[i].graph
            for q in range(n_parents):
                if q == parent_index[i]:
                    continue
                if parent_budgets[q] == 0:
                    continue
                pg = parents[q].graph
                if abs(g.n - pg.n) > parent_budgets[q]:
                    continue
                if ged_lower_bound(g, pg, cost) > parent_budgets[q] + 1e-12:
                    continue
                jobs.append((g, pg, cost, parent_budgets[q]))
                job_keys.append((i, q))
        if threads > 1 and len(jobs) > 64:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                brackets = list(pool.map(_membership_bracket, jobs, chunksize=64))
        else:
            brackets = [_membership_bracket(j) for j in jobs]
        for (i, q), (lo, hi) in zip(job_keys, brackets):
            if hi <= parent_budgets[q] + 1e-12:
                generator_sets[i].add(q)
            elif lo <= parent_budgets[q] + 1e-12:
                unknown += 1

    members_by_parent: list[list[int]] = [[] for _ in range(n_parents)]
    for i in range(n_v):
        for q in generator_sets[i]:
            members_by_parent[q].append(i)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for q in range(n_parents):
        members = members_by_parent[q]
        contrib = 1.0 / (n_parents * set_sizes[q] ** 2)
        for a_pos, i in enumerate(members):
            for j in members[a_pos:]:
                rows.append(i)
                cols.append(j)
                vals.append(contrib)
                if i != j:
                    rows.append(j)
                    cols.append(i)
                    vals.append(contrib)
    weights = sp.csr_matrix(
        (vals, (rows, cols)), shape=(n_v, n_v), dtype=np.float64
    )
    weights.sum_duplicates()

    return PopulationAugmentationGraph(
        vertices=tuple(vertices),
        weights=weights,
        natural_count=n_parents,
        aug_probability_mode=mode,
        parent_index=tuple(parent_index),
        parent_ids=tuple(s.graph.graph_id for s in parents),
        parent_labels=tuple(s.class_label for s in parents),
        parent_graphs=tuple(s.graph for s in parents),
        parent_budgets=tuple(parent_budgets),
        generator_sets=tuple(tuple(sorted(s)) for s in generator_sets),
        set_sizes=tuple(set_sizes),
        membership=membership,
        unknown_memberships=unknown,
    )


# ---------------------------------------------------------------------------
# Co-occurrence relation over a vertex set
# ---------------------------------------------------------------------------


def _direct_bracket(args):
    g1, g2, cost, threshold = args
    return ged_interval(g1, g2, cost, threshold=threshold)


class PairwiseCoOccurrence:
    """Cached distance brackets answering within-2delta queries monotonically.

    Same-parent pairs carry a concrete path bound (the two edit paths meet at
    the parent). Cross-parent pairs start from triangle bounds through the
    parent-parent bracket and escalate to a direct bracket only when the
    triangle bound straddles the queried threshold.
    """

    def __init__(
        self,
        pag: PopulationAugmentationGraph,
        cost: CostModel = UNIT_COSTS,
        threads: int = 1,
    ):
        self.pag = pag
        self.cost = cost
        self.threads = threads
        self._parent_brackets: dict[tuple[int, int], tuple[float, float]] = {}
        # direct caches hold (lo, hi, threshold_decided_at); None = unbounded
        self._direct: dict[tuple[int, int], tuple] = {}
        self._to_parent: dict[tuple[int, int], tuple] = {}
        self.unknown_pairs = 0

    def _parent_bracket(self, p: int, q: int) -> tuple[float, float]:
        if p == q:
            return (0.0, 0.0)
        key = (min(p, q), max(p, q))
        if key not in self._parent_brackets:
            self._parent_brackets[key] = ged_interval(
                self.pag.parent_graphs[key[0]], self.pag.parent_graphs[key[1]], self.cost
            )
        return self._parent_brackets[key]

    def precompute_parents(self, max_threshold: float) -> None:
        """Bracket all natural-sample pairs up front (optionally in parallel)."""
        n = self.pag.natural_count
        jobs = []
        keys = []
        for p in range(n):
            for q in range(p + 1, n):
                g1, g2 = self.pag.parent_graphs[p], self.pag.parent_graphs[q]
                quick = ged_lower_bound(g1, g2, self.cost)
                if quick > max_threshold:
                    self._parent_brackets[(p, q)] = (quick, float("inf"))
                    continue
                jobs.append((g1, g2, self.cost, max_threshold))
                keys.append((p, q))
        if self.threads > 1 and len(jobs) > 64:
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                out = list(pool.map(_direct_bracket, jobs, chunksize=32))
        else:
            out = [_direct_bracket(j) for j in jobs]
        for key, bracket in zip(keys, out):
            self._parent_brackets[key] = bracket

    def bracket(self, i: int, j: int) -> tuple[float, float]:
        key = (min(i, j), max(i, j))
        if key in self._direct:
            lo, hi, _ = self._direct[key]
            return (lo, hi)
        pag = self.pag
        pi, pj = pag.parent_index[i], pag.parent_index[j]
        len_i = len(pag.vertices[i].edit_path)
        len_j = len(pag.vertices[j].edit_path)
        plo, phi = self._parent_bracket(pi, pj)
        hi = len_i + phi + len_j
        lo = max(0.0, plo - len_i - len_j,
                 ged_lower_bound(pag.vertices[i].graph, pag.vertices[j].graph, self.cost))
        return (lo, hi)

    def verdict(self, i: int, j: int, threshold: float) -> bool | None:
        lo, hi = self.bracket(i, j)
        if hi <= threshold + 1e-12:
            return True
        if lo > threshold + 1e-12:
            return False
        key = (min(i, j), max(i, j))
        cached = self._direct.get(key)
        stale = cached is None or (
            cached[2] is not None
            and threshold > cached[2] + 1e-12
            and cached[0] <= threshold + 1e-12 < cached[1]
        )
        if stale:
            lo, hi = ged_interval(
                self.pag.vertices[i].graph,
                self.pag.vertices[j].graph,
                self.cost,
                threshold=threshold,
            )
            self._direct[key] = (lo, hi, threshold)
        else:
            lo, hi, _ = cached
        if hi <= threshold + 1e-12:
            return True
        if lo > threshold + 1e-12:
            return False
        return None

    def parent_membership_bracket(self, v: int, q: int) -> tuple[float, float]:
        """Bracket on the distance from vertex v to natural sample q."""
        pag = self.pag
        pv = pag.parent_index[v]
        if q == pv:
            return (0.0, float(len(pag.vertices[v].edit_path)))
        key = (v, q)
        if key in self._to_parent:
            lo, hi, _ = self._to_parent[key]
            return (lo, hi)
        len_v = len(pag.vertices[v].edit_path)
        plo, phi = self._parent_bracket(pv, q)
        lo = max(
            0.0,
            plo - len_v,
            ged_lower_bound(pag.vertices[v].graph, pag.parent_graphs[q], self.cost),
        )
        return (lo, len_v + phi)

    def generating_labels(self, v: int, parent_budgets: list[int]) -> set[int]:
        """Labels of naturals certified to generate vertex v at these budgets.

        The vertex's own parent always qualifies when the vertex is budget
        valid; other naturals qualify when the distance bracket certifies the
        membership threshold (uncertain brackets escalate to a direct one).
        """
        pag = self.pag
        labels = {pag.parent_labels[pag.parent_index[v]]}
        g = pag.vertices[v].graph
        for q in range(pag.natural_count):
            if q == pag.parent_index[v] or parent_budgets[q] == 0:
                continue
            if pag.parent_labels[q] in labels:
                continue
            t = parent_budgets[q]
            lo, hi = self.parent_membership_bracket(v, q)
            if lo > t + 1e-12:
                continue
            if hi > t + 1e-12:
                key = (v, q)
                cached = self._to_parent.get(key)
                stale = cached is None or (
                    cached[2] is not None
                    and t > cached[2] + 1e-12
                    and cached[0] <= t + 1e-12 < cached[1]
                )
                if stale:
                    lo, hi = ged_interval(
                        g, pag.parent_graphs[q], self.cost, threshold=t
                    )
                    self._to_parent[key] = (lo, hi, t)
                else:
                    lo, hi, _ = cached
            if hi <= t + 1e-12:
                labels.add(pag.parent_labels[q])
        return labels

    def relation(
        self, vertex_budgets: list[int], active: list[int] | None = None
    ) -> tuple[sp.csr_matrix, int]:
        """Boolean co-occurrence adjacency at per-pair threshold 2*min(budgets).

        Unknown verdicts count as non-co-occurring and are tallied. Vertices
        outside `active` (budget-invalid at this strength) get no pairs.
        """
        n = self.pag.n_vertices
        idx = list(range(n)) if active is None else list(active)
        rows, cols = [], []
        unknown = 0
        for a_pos, i in enumerate(idx):
            for j in idx[a_pos + 1 :]:
                t = 2.0 * min(vertex_budgets[i], vertex_budgets[j])
                v = self.verdict(i, j, t)
                if v is True:
                    rows.extend((i, j))
                    cols.extend((j, i))
                elif v is None:
                    unknown += 1
        data = np.ones(len(rows), dtype=bool)
        adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n), dtype=bool)
        self.unknown_pairs = unknown
        return adj, unknown


# ---------------------------------------------------------------------------
# Partitions and counts
# ---------------------------------------------------------------------------


def partition_assignment(
    pag: PopulationAugmentationGraph,
    source: str = SOURCE_EXTENDED,
    cluster_labels: list[int] | None = None,
) -> PartitionAssignment:
    """Partition of the vertex set.

    true-labels: each vertex inherits its own parent's class. The extended
    source fixes a deterministic classifier on inconsistent vertices: the
    lowest class index among the labels of all generating parents.
    """
    r = max(pag.parent_labels) + 1 if pag.parent_labels else 1
    if source == SOURCE_TRUE_LABELS:
        assignment = tuple(pag.vertex_labels())
    elif source == SOURCE_EXTENDED:
        assignment = tuple(
            min(pag.parent_labels[q] for q in gens) for gens in pag.generator_sets
        )
    elif source == SOURCE_CLUSTERS:
        if cluster_labels is None or len(cluster_labels) != pag.n_vertices:
            raise GraphError("embedding-clusters source requires cluster labels")
        assignment = tuple(int(x) for x in cluster_labels)
        r = max(assignment) + 1 if assignment else 1
    else:
        raise GraphError(f"unknown partition source {source!r}")
    return PartitionAssignment(assignment=assignment, r=r, source=source)


def count_pairs(adj: sp.spmatrix, partition: PartitionAssignment) -> tuple[int, int]:
    """(lambda, mu): ordered co-occurring pairs within / across partitions.

    Ordered means (g, g') and (g', g) both count, mirroring double-sum
    notation; the adjacency diagonal is ignored.
    """
    coo = adj.tocoo()
    lam = 0
    mu = 0
    a = partition.assignment
    for i, j in zip(coo.row, coo.col):
        if i == j:
            continue
        if a[i] == a[j]:
            lam += 1
        else:
            mu += 1
    return lam, mu


def partition_dissimilarity(
    adj: sp.spmatrix, partition: PartitionAssignment, part_index: int
) -> float:
    """Cross-pair fraction of the partition's total co-occurrence degree.

    Numerator: co-occurring pairs leaving the partition. Denominator: summed
    co-occurrence degree of its members (self-pairs excluded; a vertex always
    trivially co-occurs with itself and counting that would inflate every
    denominator). Zero degree yields 0.
    """
    coo = adj.tocoo()
    a = partition.assignment
    cut = 0
    vol = 0
    for i, j in zip(coo.row, coo.col):
        if i == j:
            continue
        if a[i] == part_index:
            vol += 1
            if a[j] != part_index:
                cut += 1
    return cut / vol if vol else 0.0


def conductance(
    pag: PopulationAugmentationGraph, partition: PartitionAssignment, part_index: int
) -> float:
    """Cross-edge count over summed positive-weight degree (self-loops excluded)."""
    coo = pag.weights.tocoo()
    a = partition.assignment
    cut = 0
    vol = 0
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if i == j or w <= 0:
            continue
        if a[i] == part_index:
            vol += 1
            if a[j] != part_index:
                cut += 1
    return cut / vol if vol else 0.0


def alpha_lower_bound(mu: int, n_vertices: int) -> tuple[float, bool]:
    """mu / |X|, clamped into [0, 1]; flag reports the over-count regime."""
    if n_vertices < 1:
        raise GraphError("empty vertex set")
    raw = mu / n_vertices
    return (min(1.0, raw), raw > 1.0)


def generalization_bound(lam: int, mu: int, r: int, n_vertices: int) -> float:
    """(r/|X|) * (mu + 2*lambda + lambda^2/mu); 0 when mu = 0.

    The lambda^2/mu blow-up at mu = 0 is an artifact of converting the
    primal alpha/rho^2 form (alpha = 0 there), so the degenerate case
    returns the primal value 0.
    """
    if r < 1 or n_vertices < 1:
        raise GraphError("r and |X| must be >= 1")
    if mu == 0:
        return 0.0
    return (r / n_vertices) * (mu + 2.0 * lam + lam * lam / mu)


def bound_primal(alpha: float, rho: float) -> float:
    """alpha / rho^2 form of the bound (infinite for rho = 0, alpha > 0)."""
    if rho == 0.0:
        return 0.0 if alpha == 0.0 else float("inf")
    return alpha / (rho * rho)


def detect_inconsistent(
    pag: PopulationAugmentationGraph,
    partition: PartitionAssignment,
    adj: sp.spmatrix,
    label_sets=None,
) -> tuple[list[int], list[int]]:
    """(inconsistent vertex ids, candidate ids).

    Candidates are endpoints of cross-partition co-occurring pairs; the label
    sets of the generating naturals (more than one distinct class) refine them
    to exactly inconsistent vertices. `label_sets(v)` may override the default
    generator-set labels, e.g. with budget-aware membership certification.
    """
    coo = adj.tocoo()
    a = partition.assignment
    candidates: set[int] = set()
    for i, j in zip(coo.row, coo.col):
        if i != j and a[i] != a[j]:
            candidates.add(int(i))
            candidates.add(int(j))
    labels = pag.parent_labels
    if label_sets is None:
        label_sets = lambda v: {labels[q] for q in pag.generator_sets[v]}
    inconsistent = [v for v in sorted(candidates) if len(label_sets(v)) > 1]
    return inconsistent, sorted(candidates)


@dataclass(frozen=True)
class ConnectivityReport:
    confirmed: int
    violations: tuple[tuple[int, int], ...]
    unverified: int

    @property
    def ok(self) -> bool:
        return not self.violations


def pag_connectivity_check(
    pag: PopulationAugmentationGraph,
    delta: int,
    cooc: PairwiseCoOccurrence | None = None,
    cost: CostModel = UNIT_COSTS,
) -> ConnectivityReport:
    """Assert the forward direction: positive weight implies GED <= 2*delta.

    A violation needs a certified lower bound above the threshold; pairs whose
    bracket straddles it are reported as unverified coverage. The reverse
    direction is not asserted (close pairs may simply lack a common parent in
    a finite natural set).
    """
    cooc = cooc or PairwiseCoOccurrence(pag, cost)
    coo = pag.weights.tocoo()
    confirmed = 0
    unverified = 0
    violations = []
    seen = set()
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if i >= j or w <= 0:
            continue
        if (i, j) in seen:
            continue
        seen.add((i, j))
        v = cooc.verdict(int(i), int(j), 2.0 * delta)
        if v is True:
            confirmed += 1
        elif v is False:
            violations.append((int(i), int(j)))
        else:
            unverified += 1
    return ConnectivityReport(
        confirmed=confirmed, violations=tuple(violations), unverified=unverified
    )


# ---------------------------------------------------------------------------
# Analysis sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    family: str
    gamma: float
    delta_mean: float
    n_vertices: int
    lam: int
    mu: int
    alpha_lower: float
    alpha_clamped: bool
    phi: tuple[float, ...]
    rho_min: float
    rho_max: float
    conductance: tuple[float, ...]
    bound_value: float
    inconsistent_ids: tuple[str, ...]
    candidate_count: int
    unknown_pairs: int

    def summary_row(self) -> dict:
        row = {
            "family": self.family,
            "gamma": self.gamma,
            "delta_mean": self.delta_mean,
            "n_vertices": self.n_vertices,
            "lambda": self.lam,
            "mu": self.mu,
            "alpha_lower": self.alpha_lower,
            "rho_min": self.rho_min,
            "rho_max": self.rho_max,
            "bound_value": self.bound_value,
            "inconsistent_count": len(self.inconsistent_ids),
            "unknown_pairs": self.unknown_pairs,
        }
        for i, v in enumerate(self.phi):
            row[f"phi_{i}"] = v
        for i, v in enumerate(self.conductance):
            row[f"conductance_{i}"] = v
        return row


def analyze_sweep(
    samples: list[LabeledGraph],
    family: str,
    gammas: list[float],
    samples_per_parent: int,
    seed: int,
    mode: str = MODE_SAMPLED,
    cap: int = 2000,
    cost: CostModel = UNIT_COSTS,
    threads: int = 1,
    partition_source: str = SOURCE_TRUE_LABELS,
) -> list[AnalysisReport]:
    """Per-strength analysis rows over one augmentation family.

    One vertex pool is drawn at the largest strength in the grid and held
    fixed across the sweep: each strength then activates the vertices whose
    edit paths fit its budget and widens the pairwise threshold. Holding the
    pool fixed is what turns the non-decreasing-threshold argument into an
    exactly monotone cross-pair count; resampling per strength would confound
    the sweep with sampling noise.
    """
    gammas = sorted(gammas)
    g_max = gammas[-1]
    spec_max = AugmentationSpec(family, g_max)
    pag = build_pag(
        samples,
        spec_max,
        mode=mode,
        cap_or_sample_budget=cap if mode == MODE_EXACT else samples_per_parent,
        seed=seed,
        membership=MEMBERSHIP_PROVENANCE,
        include_identity=True,
        cost=cost,
        threads=threads,
    )
    cooc = PairwiseCoOccurrence(pag, cost, threads=threads)
    max_budget = max(
        (allowable_budget(s.graph, spec_max) for s in samples), default=0
    )
    cooc.precompute_parents(2.0 * max_budget)

    reports = []
    for gamma in gammas:
        spec = AugmentationSpec(family, gamma)
        budgets = [
            allowable_budget(pag.parent_graphs[pag.parent_index[i]], spec)
            for i in range(pag.n_vertices)
        ]
        active = [
            i
            for i in range(pag.n_vertices)
            if len(pag.vertices[i].edit_path) <= budgets[i]
        ]
        adj, unknown = cooc.relation(budgets, active=active)
        partition = partition_assignment(pag, source=partition_source)
        lam, mu = count_pairs(adj, partition)
        n_x = len(active)
        alpha, clamped = alpha_lower_bound(mu, max(1, n_x))
        phi = tuple(
            partition_dissimilarity(adj, partition, i) for i in range(partition.r)
        )
        cond = tuple(conductance(pag, partition, i) for i in range(partition.r))
        parent_budgets = [allowable_budget(g, spec) for g in pag.parent_graphs]
        inconsistent, candidates = detect_inconsistent(
            pag,
            partition,
            adj,
            label_sets=lambda v: cooc.generating_labels(v, parent_budgets),
        )
        delta_mean = float(np.mean(parent_budgets)) if parent_budgets else 0.0
        reports.append(
            AnalysisReport(
                family=family,
                gamma=gamma,
                delta_mean=delta_mean,
                n_vertices=n_x,
                lam=lam,
                mu=mu,
                alpha_lower=alpha,
                alpha_clamped=clamped,
                phi=phi,
                rho_min=min(phi) if phi else 0.0,
                rho_max=max(phi) if phi else 0.0,
                conductance=cond,
                bound_value=generalization_bound(
                    lam, mu, partition.r, max(1, n_x)
                ),
                inconsistent_ids=tuple(
                    pag.vertices[v].graph.graph_id for v in inconsistent
                ),
                candidate_count=len(candidates),
                unknown_pairs=unknown,
            )
        )
    return reports
