"""Evaluation suite: invariance/separability scores, kNN, linear probe.

All similarity here is cosine, so every score is invariant to global
orthogonal rotation and positive scaling of the embedding space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphError
from .seeds import derive_seed

SEPARABILITY_EPS = 1e-6
SEPARABILITY_CAP = 1e6
DEFAULT_K_GRID = (5, 10, 15, 20)


@dataclass(frozen=True)
class EvalSplit:
    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        parts = [set(self.train), set(self.val), set(self.test)]
        total = sum(len(p) for p in parts)
        if total != len(set().union(*parts)):
            raise GraphError("split parts overlap")
        train_classes = {self.labels[i] for i in self.train}
        if set(self.labels) - train_classes:
            raise GraphError("some class absent from the training split")


def stratified_split(
    labels: list[int],
    seed: int,
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> EvalSplit:
    """80/10/10 per-class split (validation and test get at least one item
    per class when the class is big enough to spare them)."""
    rng = np.random.default_rng(seed)
    train, val, test = [], [], []
    by_class: dict[int, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(y, []).append(i)
    for y in sorted(by_class):
        idx = by_class[y]
        perm = [idx[j] for j in rng.permutation(len(idx))]
        n = len(perm)
        n_val = max(1, int(round(fractions[1] * n))) if n >= 3 else 0
        n_test = max(1, int(round(fractions[2] * n))) if n >= 3 else 0
        test.extend(perm[:n_test])
        val.extend(perm[n_test : n_test + n_val])
        train.extend(perm[n_test + n_val :])
    return EvalSplit(
        train=tuple(sorted(train)),
        val=tuple(sorted(val)),
        test=tuple(sorted(test)),
        labels=tuple(labels),
    )


@dataclass(frozen=True)
class ScoreRow:
    sample_id: str
    label: int
    invariance: float  # NaN when flagged
    separability: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScoreTable:
    rows: tuple[ScoreRow, ...]

    def median(self, column: str) -> float:
        vals = [
            getattr(r, column)
            for r in self.rows
            if np.isfinite(getattr(r, column))
        ]
        return float(np.median(vals)) if vals else float("nan")

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("id,label,invariance,separability,flags\n")
            for r in self.rows:
                flags = ";".join(r.flags)
                fh.write(
                    f"{r.sample_id},{r.label},{r.invariance:.12g},"
                    f"{r.separability:.12g},{flags}\n"
                )


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float("nan")
    return float(np.dot(a, b) / (na * nb))


def invariance_score(
    embed_fn,
    sample,
    spec,
    seed: int,
    n_augs: int = 30,
    augment_fn=None,
) -> tuple[float, tuple[str, ...]]:
    """Mean cosine similarity between a sample and fresh augmentations of it.

    embed_fn maps a sample or augmentation record to a vector; augment_fn
    defaults to the stock augmentation application with derived seeds.
    """
    from .augment import apply as apply_aug

    if augment_fn is None:
        augment_fn = lambda s, sp, sd: apply_aug(
            s.graph, sp, sd, content_mask=s.content_mask
        )
    base = np.asarray(embed_fn(sample), dtype=np.float64)
    if np.linalg.norm(base) == 0:
        return float("nan"), ("zero-norm",)
    sims = []
    flagged = False
    for t in range(n_augs):
        rec = augment_fn(sample, spec, derive_seed(seed, "inv", t))
        vec = np.asarray(embed_fn(rec), dtype=np.float64)
        c = _cosine(base, vec)
        if np.isnan(c):
            flagged = True
            continue
        sims.append(c)
    if not sims:
        return float("nan"), ("zero-norm",)
    flags = ("zero-norm-augs",) if flagged else ()
    return float(np.mean(sims)), flags


def _cosine_matrix(embeddings: np.ndarray) -> np.ndarray:
    e = np.asarray(embeddings, dtype=np.float64)
    norms = np.linalg.norm(e, axis=1)
    safe = np.where(norms == 0, 1.0, norms)
    unit = e / safe[:, np.newaxis]
    sims = unit @ unit.T
    sims[norms == 0, :] = np.nan
    sims[:, norms == 0] = np.nan
    return sims


def separability_score(
    embeddings: np.ndarray, labels: list[int], sample_index: int
) -> tuple[float, tuple[str, ...]]:
    """Max same-class cosine (self excluded) over max cross-class cosine.

    A cross-class maximum at or below the epsilon guard yields the capped
    sentinel with a flag instead of a division blow-up.
    """
    labels_arr = np.asarray(labels)
    if len(set(labels)) < 2:
        raise GraphError("separability needs at least two classes")
    sims = _cosine_matrix(embeddings)[sample_index]
    same = labels_arr == labels_arr[sample_index]
    same[sample_index] = False
    cross = ~(labels_arr == labels_arr[sample_index])
    same_max = np.nanmax(sims[same]) if same.any() else float("nan")
    cross_max = np.nanmax(sims[cross])
    if np.isnan(same_max) or np.isnan(cross_max):
        return float("nan"), ("zero-norm",)
    if cross_max <= SEPARABILITY_EPS:
        return SEPARABILITY_CAP, ("cross-max-capped",)
    return float(same_max / cross_max), ()


def _knn_predict(
    train_emb: np.ndarray,
    train_labels: np.ndarray,
    query_emb: np.ndarray,
    k: int,
) -> np.ndarray:
    sims = _cosine_matrix(np.vstack([train_emb, query_emb]))
    n_train = train_emb.shape[0]
    block = sims[n_train:, :n_train]
    block = np.nan_to_num(block, nan=-2.0)
    out = np.empty(query_emb.shape[0], dtype=int)
    for qi in range(query_emb.shape[0]):
        # sort by similarity descending, index ascending for determinism
        order = np.lexsort((np.arange(n_train), -block[qi]))[:k]
        votes: dict[int, int] = {}
        for t in order:
            votes[int(train_labels[t])] = votes.get(int(train_labels[t]), 0) + 1
        best = max(votes.values())
        winners = sorted(y for y, c in votes.items() if c == best)
        if len(winners) == 1:
            out[qi] = winners[0]
        else:
            # vote tie: fall back to the nearest neighbor's label
            out[qi] = int(train_labels[order[0]])
    return out


@dataclass(frozen=True)
class KnnResult:
    test_accuracy: float
    chosen_k: int
    val_accuracy: float
    skipped_k: tuple[int, ...] = ()


def knn_evaluate(
    embeddings: np.ndarray,
    split: EvalSplit,
    k_grid: tuple[int, ...] = DEFAULT_K_GRID,
) -> KnnResult:
    """Cosine kNN; k tuned on validation (ties break to the smallest k)."""
    e = np.asarray(embeddings, dtype=np.float64)
    if not split.train:
        raise GraphError("empty training split")
    tr = np.array(split.train)
    labels = np.asarray(split.labels)
    train_emb, train_lab = e[tr], labels[tr]
    skipped = tuple(k for k in k_grid if k > len(tr))
    usable = [k for k in k_grid if k <= len(tr)]
    if not usable:
        usable = [len(tr)]
    val = np.array(split.val) if split.val else tr
    best_k, best_acc = None, -1.0
    for k in sorted(usable):
        pred = _knn_predict(train_emb, train_lab, e[val], k)
        acc = float(np.mean(pred == labels[val]))
        if acc > best_acc + 1e-12:
            best_k, best_acc = k, acc
    test = np.array(split.test) if split.test else val
    pred = _knn_predict(train_emb, train_lab, e[test], best_k)
    return KnnResult(
        test_accuracy=float(np.mean(pred == labels[test])),
        chosen_k=int(best_k),
        val_accuracy=best_acc,
        skipped_k=skipped,
    )


class ProbeDivergenceError(RuntimeError):
    def __init__(self, iteration: int):
        super().__init__(f"linear probe diverged at epoch {iteration}")
        self.iteration = iteration


def linear_probe(
    embeddings: np.ndarray,
    split: EvalSplit,
    epochs: int = 200,
    step: float = 0.01,
    seed: int = 0,
) -> float:
    """Full-batch multinomial logistic regression trained with Adam.

    Deterministic given the seed; returns test accuracy.
    """
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim != 2 or e.shape[1] == 0:
        raise GraphError("embeddings must be (n, k>=1)")
    labels = np.asarray(split.labels)
    classes = sorted(set(labels.tolist()))
    class_pos = {y: i for i, y in enumerate(classes)}
    c = len(classes)
    tr = np.array(split.train)
    x = e[tr]
    y = np.array([class_pos[int(v)] for v in labels[tr]])
    n, d = x.shape
    rng = np.random.default_rng(seed)
    w = 0.01 * rng.standard_normal((d, c))
    b = np.zeros(c)
    m_w = np.zeros_like(w)
    v_w = np.zeros_like(w)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    onehot = np.zeros((n, c))
    onehot[np.arange(n), y] = 1.0
    for t in range(1, epochs + 1):
        logits = x @ w + b
        logits -= logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        probs = expl / expl.sum(axis=1, keepdims=True)
        loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
        if not np.isfinite(loss):
            raise ProbeDivergenceError(t)
        grad = (probs - onehot) / n
        g_w = x.T @ grad
        g_b = grad.sum(axis=0)
        m_w = beta1 * m_w + (1 - beta1) * g_w
        v_w = beta2 * v_w + (1 - beta2) * g_w**2
        m_b = beta1 * m_b + (1 - beta1) * g_b
        v_b = beta2 * v_b + (1 - beta2) * g_b**2
        mhat_w = m_w / (1 - beta1**t)
        vhat_w = v_w / (1 - beta2**t)
        mhat_b = m_b / (1 - beta1**t)
        vhat_b = v_b / (1 - beta2**t)
        w -= step * mhat_w / (np.sqrt(vhat_w) + eps)
        b -= step * mhat_b / (np.sqrt(vhat_b) + eps)
    test = np.array(split.test) if split.test else tr
    logits = e[test] @ w + b
    pred = np.array([classes[i] for i in logits.argmax(axis=1)])
    return float(np.mean(pred == labels[test]))


def score_table(
    sample_ids: list[str],
    labels: list[int],
    invariances: list[tuple[float, tuple[str, ...]]],
    embeddings: np.ndarray,
) -> ScoreTable:
    rows = []
    for i, (sid, y) in enumerate(zip(sample_ids, labels)):
        inv, inv_flags = invariances[i]
        sep, sep_flags = separability_score(embeddings, labels, i)
        rows.append(
            ScoreRow(
                sample_id=sid,
                label=y,
                invariance=inv,
                separability=sep,
                flags=tuple(inv_flags) + tuple(sep_flags),
            )
        )
    return ScoreTable(rows=tuple(rows))
