"""Spectral embedding of the PAG and representation-level losses.

Embeddings come from the top eigenpairs of the degree-normalized similarity
matrix; rows are additionally scaled by 1/sqrt(degree), which makes vertices
of one connected component share identical rows and keeps the downstream
cosine metrics rotation-invariant.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .augment import AugmentationRecord
from .ged import UNIT_COSTS, ged_interval, ged_lower_bound
from .graphs import GraphError
from .pag import PopulationAugmentationGraph

DENSE_EIGEN_LIMIT = 2000
BLOB_MAGIC = b"GCLEMB\x00\x00"


@dataclass(frozen=True)
class EmbeddingMatrix:
    rows: np.ndarray  # (n_vertices, dim) float64
    vertex_ids: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    def __post_init__(self):
        if self.rows.shape[0] != len(self.vertex_ids):
            raise GraphError("row count does not match vertex ids")
        if not np.all(np.isfinite(self.rows)):
            raise GraphError("non-finite embedding entries")


class EigenConvergenceError(RuntimeError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"eigensolver residual {residual:.3e} above tol {tol:.3e}")
        self.residual = residual


def normalized_similarity(pag: PopulationAugmentationGraph) -> sp.csr_matrix:
    """D^{-1/2} W D^{-1/2}; zero-degree vertices keep zero rows."""
    w = pag.weights.tocsr().astype(np.float64)
    if w.nnz == 0 or w.sum() == 0:
        raise GraphError("all-zero weight matrix")
    deg = np.asarray(w.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    d = sp.diags(inv_sqrt)
    return (d @ w @ d).tocsr()


def _dense_topk(mat: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(mat)
    order = np.argsort(evals)[::-1][:k]
    return evals[order], evecs[:, order]


def _block_iteration_topk(
    mat: sp.csr_matrix, k: int, tol: float, max_iter: int = 500, seed: int = 7
) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal (block power) iteration with Rayleigh-Ritz extraction.

    The similarity matrix can be indefinite, so iteration runs on a shifted
    positive form and Ritz values are read off the original matrix.
    """
    n = mat.shape[0]
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    shifted = lambda x: mat @ x + x  # spectrum shifted by +1 into [0, 2]
    last_residual = np.inf
    for _ in range(max_iter):
        z = shifted(q)
        q, _ = np.linalg.qr(z)
        t = q.T @ (mat @ q)
        t = 0.5 * (t + t.T)
        ritz_vals, ritz_vecs = np.linalg.eigh(t)
        order = np.argsort(ritz_vals)[::-1]
        ritz_vals = ritz_vals[order]
        ritz_vecs = ritz_vecs[:, order]
        v = q @ ritz_vecs
        resid = mat @ v - v * ritz_vals[np.newaxis, :]
        norms = np.linalg.norm(resid, axis=0)
        scale = np.maximum(1.0, np.abs(ritz_vals))
        last_residual = float(np.max(norms / scale))
        if last_residual <= tol:
            return ritz_vals, v
        q = v
    raise EigenConvergenceError(last_residual, tol)


def spectral_embed(
    pag: PopulationAugmentationGraph, k: int, tol: float = 1e-8
) -> tuple[EmbeddingMatrix, np.ndarray]:
    """Top-k eigenpairs of the normalized similarity; rows scaled by d^{-1/2}."""
    if k < 1 or k > pag.n_vertices:
        raise GraphError(f"k={k} outside 1..{pag.n_vertices}")
    if tol <= 0:
        raise GraphError("tol must be positive")
    s = normalized_similarity(pag)
    n = s.shape[0]
    if n <= DENSE_EIGEN_LIMIT:
        evals, evecs = _dense_topk(s.toarray(), k)
    else:
        evals, evecs = _block_iteration_topk(s, k, tol)
    resid_norms = np.linalg.norm(s @ evecs - evecs * evals[np.newaxis, :], axis=0)
    worst = float(np.max(resid_norms / np.maximum(1.0, np.abs(evals))))
    if worst > tol:
        raise EigenConvergenceError(worst, tol)
    deg = np.asarray(pag.weights.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    rows = evecs * inv_sqrt[:, np.newaxis]
    emb = EmbeddingMatrix(
        rows=rows,
        vertex_ids=tuple(v.graph.graph_id for v in pag.vertices),
        metadata={
            "row_scaling": "eigenvector entries scaled per vertex by degree^{-1/2}",
            "zero_degree_vertices": int(np.sum(~nz)),
            "residual": worst,
        },
    )
    return emb, evals


def extend_embedding(
    pag: PopulationAugmentationGraph,
    embedding: EmbeddingMatrix,
    eigenvalues: np.ndarray,
    record: AugmentationRecord,
    eig_floor: float = 1e-9,
    structural: bool | None = None,
) -> np.ndarray:
    """Out-of-sample (Nystrom) embedding of a fresh augmentation record.

    The record's similarity row is built from its generating parents: its own
    provenance parent always, plus edit-distance-certified parents when the
    PAG itself was built with structural membership (a PAG with no
    cross-parent generation cannot acquire any for fresh samples of the same
    distribution, so the certification sweep is skipped then).
    """
    parent_pos = {pid: i for i, pid in enumerate(pag.parent_ids)}
    if record.parent_id not in parent_pos:
        raise GraphError(f"record parent {record.parent_id!r} not in the PAG")
    gens = {parent_pos[record.parent_id]}
    if structural is None:
        structural = pag.membership == "structural" and any(
            len(g) > 1 for g in pag.generator_sets
        )
    if structural:
        g = record.graph
        for q in range(pag.natural_count):
            if q in gens or pag.parent_budgets[q] == 0:
                continue
            pg = pag.parent_graphs[q]
            if abs(g.n - pg.n) > pag.parent_budgets[q]:
                continue
            if ged_lower_bound(g, pg) > pag.parent_budgets[q] + 1e-12:
                continue
            lo, hi = ged_interval(g, pg, threshold=pag.parent_budgets[q])
            if hi <= pag.parent_budgets[q] + 1e-12:
                gens.add(q)
    n = pag.n_vertices
    w_row = np.zeros(n)
    for q in gens:
        contrib = 1.0 / (pag.natural_count * pag.set_sizes[q] ** 2)
        for v in range(n):
            if q in pag.generator_sets[v]:
                w_row[v] += contrib
    d_g = w_row.sum()
    if d_g <= 0:
        return np.zeros(embedding.dim)
    deg = np.asarray(pag.weights.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    s_row = w_row * inv_sqrt / np.sqrt(d_g)
    # embedding.rows already carry d^{-1/2}; undo it to recover eigenvectors
    phi = embedding.rows * np.where(nz, np.sqrt(deg), 0.0)[:, np.newaxis]
    coords = np.zeros(embedding.dim)
    for j in range(embedding.dim):
        lam = eigenvalues[j]
        if abs(lam) <= eig_floor:
            continue
        coords[j] = float(s_row @ phi[:, j]) / lam
    return coords / np.sqrt(d_g)


def specloss(
    embeddings: np.ndarray,
    positive_pairs: list[tuple[int, int]],
    negative_pairs: list[tuple[int, int]],
) -> float:
    """-2*E[f(a)^T f(b)] over positives + E[(f(a)^T f(b))^2] over negatives."""
    if not positive_pairs or not negative_pairs:
        raise GraphError("empty pair list")
    e = np.asarray(embeddings, dtype=np.float64)
    pos = np.array(positive_pairs)
    neg = np.array(negative_pairs)
    pos_dots = np.einsum("ij,ij->i", e[pos[:, 0]], e[pos[:, 1]])
    neg_dots = np.einsum("ij,ij->i", e[neg[:, 0]], e[neg[:, 1]])
    return float(-2.0 * pos_dots.mean() + (neg_dots**2).mean())


def alignment(embeddings: np.ndarray, positive_pairs: list[tuple[int, int]]) -> float:
    """Mean squared Euclidean distance over positive pairs."""
    if not positive_pairs:
        raise GraphError("empty pair list")
    e = np.asarray(embeddings, dtype=np.float64)
    pos = np.array(positive_pairs)
    diff = e[pos[:, 0]] - e[pos[:, 1]]
    return float(np.einsum("ij,ij->i", diff, diff).mean())


# ---------------------------------------------------------------------------
# Export formats
# ---------------------------------------------------------------------------


def write_embeddings_csv(emb: EmbeddingMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        cols = ",".join(f"e{j}" for j in range(emb.dim))
        fh.write(f"vertex_id,{cols}\n")
        for vid, row in zip(emb.vertex_ids, emb.rows):
            vals = ",".join(f"{x:.12g}" for x in row)
            fh.write(f"{vid},{vals}\n")


def write_embeddings_blob(emb: EmbeddingMatrix, path: str) -> None:
    """16-byte header (magic, rows, cols) then column-major float64 data."""
    rows, cols = emb.rows.shape
    with open(path, "wb") as fh:
        fh.write(BLOB_MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(np.asfortranarray(emb.rows).tobytes(order="F"))


def read_embeddings_blob(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != BLOB_MAGIC:
            raise GraphError("bad embedding blob magic")
        rows, cols = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(), dtype=np.float64)
    return data.reshape((rows, cols), order="F")
