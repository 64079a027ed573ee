"""Synthetic graph-classification benchmark generator.

Each sample is one or more copies of a class-specific motif ("content")
attached to a random background tree ("style") whose size is a ratio of the
content size. The motif set fully determines the labels, so content-aware
augmentation and label-recovery oracles are available by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import (
    AttributedGraph,
    GraphError,
    LabeledGraph,
    are_isomorphic,
    connected_components,
    cut_edges,
    induced_subgraph,
    wl_hash,
)
from .seeds import derive_seed

DEFAULT_FEATURE_DIM = 10
MOTIF_WL_ITERATIONS = 3


def _motif(n: int, edges: list[tuple[int, int]], feature_dim: int) -> AttributedGraph:
    attrs = [(1,) * feature_dim] * n
    return AttributedGraph.build(n, edges, attrs)


def default_motifs(feature_dim: int = DEFAULT_FEATURE_DIM) -> list[AttributedGraph]:
    """Six pairwise non-isomorphic, 1-WL-distinguishable class motifs."""
    return [
        _motif(3, [(0, 1), (1, 2), (0, 2)], feature_dim),  # triangle
        _motif(4, [(0, 1), (1, 2), (2, 3), (0, 3)], feature_dim),  # 4-cycle
        _motif(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], feature_dim),  # 5-cycle
        _motif(5, [(0, 1), (0, 2), (0, 3), (0, 4)], feature_dim),  # 4-star
        _motif(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], feature_dim),  # 4-clique
        # house: square 0-1-2-3 with roof apex 4 over edge (0, 1)
        _motif(5, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)], feature_dim),
    ]


def validate_motif_set(motifs: list[AttributedGraph]) -> list[tuple[int, int, str]]:
    """Report (i, j, reason) for every failing motif pair; empty = valid.

    A pair fails when the motifs are isomorphic or when WL hashing cannot tell
    them apart within MOTIF_WL_ITERATIONS rounds (GNN-expressiveness proxy).
    """
    failures = []
    for i in range(len(motifs)):
        for j in range(i + 1, len(motifs)):
            if are_isomorphic(motifs[i], motifs[j]):
                failures.append((i, j, "isomorphic"))
            elif all(
                wl_hash(motifs[i], k) == wl_hash(motifs[j], k)
                for k in range(MOTIF_WL_ITERATIONS + 1)
            ):
                failures.append((i, j, "wl-indistinguishable"))
    return failures


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs of the generation process.

    style_ratio scales background size relative to content size (a single
    knob; some write-ups call it a style multiplier, others a style ratio).
    """

    motifs: tuple[AttributedGraph, ...]
    samples_per_class: int
    style_ratio: float
    motif_copies_range: tuple[int, int] = (1, 3)
    background_jitter: int = 2
    edge_noise_fraction: float = 0.10
    feature_dim: int = DEFAULT_FEATURE_DIM
    master_seed: int = 0

    def __post_init__(self):
        if self.samples_per_class < 1:
            raise GraphError("samples_per_class must be >= 1")
        if self.style_ratio < 0:
            raise GraphError("style_ratio must be >= 0")
        lo, hi = self.motif_copies_range
        if lo < 1 or hi < lo:
            raise GraphError(f"bad motif_copies_range {self.motif_copies_range}")
        if not (0 <= self.edge_noise_fraction < 1):
            raise GraphError("edge_noise_fraction must be in [0, 1)")
        if self.background_jitter < 0:
            raise GraphError("background_jitter must be >= 0")
        failures = validate_motif_set(list(self.motifs))
        if failures:
            raise GraphError(f"invalid motif set: {failures}")

    @property
    def num_classes(self) -> int:
        return len(self.motifs)

    @staticmethod
    def default(
        samples_per_class: int,
        style_ratio: float,
        master_seed: int,
        **overrides,
    ) -> "GenerationConfig":
        cfg = GenerationConfig(
            motifs=tuple(default_motifs(overrides.pop("feature_dim", DEFAULT_FEATURE_DIM))),
            samples_per_class=samples_per_class,
            style_ratio=style_ratio,
            master_seed=master_seed,
        )
        return replace(cfg, **overrides) if overrides else cfg


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledGraph, ...]
    config: GenerationConfig

    @property
    def r(self) -> int:
        return self.config.num_classes


def random_background_tree(n: int, seed: int) -> AttributedGraph:
    """Uniform random labeled tree on n nodes via Prüfer-sequence decoding."""
    if n < 0:
        raise GraphError("tree size must be >= 0")
    attrs = [(1,)] * n
    if n <= 1:
        return AttributedGraph.build(n, [], attrs)
    if n == 2:
        return AttributedGraph.build(2, [(0, 1)], attrs)
    rng = np.random.default_rng(seed)
    prufer = rng.integers(0, n, size=n - 2)
    degree = [1] * n
    for x in prufer:
        degree[x] += 1
    edges = []
    candidates = sorted(i for i in range(n) if degree[i] == 1)
    import heapq

    heapq.heapify(candidates)
    for x in prufer:
        leaf = heapq.heappop(candidates)
        edges.append((leaf, int(x)))
        degree[int(x)] -= 1
        if degree[int(x)] == 1:
            heapq.heappush(candidates, int(x))
    u = heapq.heappop(candidates)
    v = heapq.heappop(candidates)
    edges.append((u, v))
    return AttributedGraph.build(n, edges, attrs)


def _absent_pairs_touching(g_edges: set, n: int, first_bg: int) -> list[tuple[int, int]]:
    out = []
    for u in range(n):
        for v in range(u + 1, n):
            if v < first_bg and u < first_bg:
                continue  # both content: never touched by style noise
            if (u, v) not in g_edges:
                out.append((u, v))
    return out


def generate_sample(class_id: int, config: GenerationConfig, sample_seed: int) -> LabeledGraph:
    """One labeled sample; a pure function of (class_id, config, sample_seed).

    Pipeline: draw motif copy count m; content size C_n = m * |motif|;
    style size S_n = floor(style_ratio * C_n); background tree on a node count
    drawn uniformly from [max(0, S_n - jitter), S_n + jitter]; join everything
    with one bridge edge per motif copy; perturb up to edge_noise_fraction of
    the background-incident edges (content edges are never touched, otherwise
    motifs would stop determining labels); constant node attributes.
    """
    if not (0 <= class_id < config.num_classes):
        raise GraphError(f"class_id {class_id} out of range 0..{config.num_classes - 1}")
    motif = config.motifs[class_id]
    rng = np.random.default_rng(sample_seed)
    lo, hi = config.motif_copies_range
    m = int(rng.integers(lo, hi + 1))
    content_n = m * motif.n
    style_n = int(np.floor(config.style_ratio * content_n))
    b_lo = max(0, style_n - config.background_jitter)
    b_hi = style_n + config.background_jitter
    b = int(rng.integers(b_lo, b_hi + 1))

    edges: set[tuple[int, int]] = set()
    for copy in range(m):
        off = copy * motif.n
        for u, v in motif.sorted_edges():
            edges.add((u + off, v + off))
    first_bg = content_n
    tree = random_background_tree(b, int(rng.integers(0, 2**63)))
    for u, v in tree.sorted_edges():
        edges.add(tuple(sorted((u + first_bg, v + first_bg))))
    n = content_n + b

    # bridges: one per motif copy from the background; with no background,
    # chain the copies so the sample stays connected
    if b > 0:
        for copy in range(m):
            bg = first_bg + int(rng.integers(0, b))
            mnode = copy * motif.n + int(rng.integers(0, motif.n))
            edges.add(tuple(sorted((bg, mnode))))
    else:
        for copy in range(1, m):
            a = (copy - 1) * motif.n + int(rng.integers(0, motif.n))
            c = copy * motif.n + int(rng.integers(0, motif.n))
            edges.add(tuple(sorted((a, c))))

    attrs = [(1,) * config.feature_dim] * n
    # style edge noise: only edges with a background endpoint are eligible,
    # removals must not disconnect the sample
    style_edges = [e for e in sorted(edges) if e[0] >= first_bg or e[1] >= first_bg]
    k_max = int(np.floor(config.edge_noise_fraction * len(style_edges)))
    k = int(rng.integers(0, k_max + 1)) if k_max > 0 else 0
    for _ in range(k):
        add = bool(rng.integers(0, 2))
        g_now = AttributedGraph.build(n, edges, attrs)
        if not add:
            cuts = cut_edges(g_now)
            removable = [
                e
                for e in sorted(edges)
                if (e[0] >= first_bg or e[1] >= first_bg) and e not in cuts
            ]
            if removable:
                edges.discard(removable[int(rng.integers(0, len(removable)))])
                continue
            add = True
        if add:
            absent = _absent_pairs_touching(edges, n, first_bg)
            if absent:
                edges.add(absent[int(rng.integers(0, len(absent)))])

    graph = AttributedGraph.build(n, edges, attrs)
    return LabeledGraph(
        graph=graph,
        class_label=class_id,
        content_mask=frozenset(range(content_n)),
        provenance_seed=sample_seed,
    )


def generate_dataset(config: GenerationConfig) -> Dataset:
    """C * samples_per_class samples with per-sample derived seeds."""
    samples = []
    for class_id in range(config.num_classes):
        for idx in range(config.samples_per_class):
            seed = derive_seed(config.master_seed, "sample", class_id, idx)
            sample = generate_sample(class_id, config, seed)
            gid = f"c{class_id}-{idx:04d}"
            samples.append(
                LabeledGraph(
                    graph=sample.graph.with_id(gid),
                    class_label=sample.class_label,
                    content_mask=sample.content_mask,
                    provenance_seed=sample.provenance_seed,
                )
            )
    return Dataset(samples=tuple(samples), config=config)


def motif_copy_node_ranges(sample: LabeledGraph, motif_size: int) -> list[range]:
    """Content nodes occupy leading index blocks, one block per motif copy."""
    content_n = len(sample.content_mask)
    if content_n % motif_size:
        raise GraphError("content mask size is not a multiple of the motif size")
    return [range(i, i + motif_size) for i in range(0, content_n, motif_size)]


def recover_label(sample: LabeledGraph, motifs: list[AttributedGraph]) -> int:
    """Oracle: identify the unique class whose motif matches the content.

    Splits the content-induced subgraph into connected components and matches
    each component against the motif set by exact isomorphism. Requires a
    nonempty background (with no background, motif copies are chained by
    bridge edges and the components merge).
    """
    content = induced_subgraph(sample.graph, sorted(sample.content_mask))
    classes = set()
    for comp in connected_components(content):
        piece = induced_subgraph(content, comp)
        matches = [i for i, motif in enumerate(motifs) if are_isomorphic(piece, motif)]
        if len(matches) != 1:
            raise GraphError(
                f"content component matches {len(matches)} motifs, expected exactly 1"
            )
        classes.add(matches[0])
    if len(classes) != 1:
        raise GraphError(f"sample content matches classes {sorted(classes)}")
    return classes.pop()
