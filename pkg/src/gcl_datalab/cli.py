"""Batch command-line surface over generation, augmentation, and analysis.

Subcommands: generate | augment | analyze | embed-eval | ged | report.
Every command is a pure function of its input files, flags and seeds; reruns
write byte-identical artifacts. Exit codes: 0 success, 1 usage error, 2 data
error, 3 infeasibility refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import metrics, report as report_mod
from .augment import (
    AugmentationSpec,
    CapExceededError,
    FAMILIES,
    allowable_budget,
    apply as apply_aug,
    count_augmentations_upper_bound,
)
from .ged import GedSizeError, ged_exact, ged_within, GED_EXACT_SIZE_LIMIT
from .graphs import (
    GraphError,
    LabeledGraph,
    RecordParseError,
    deserialize,
    read_jsonl,
    serialize,
    write_jsonl,
)
from .pag import (
    MODE_EXACT,
    MODE_SAMPLED,
    analyze_sweep,
    build_pag,
)
from .seeds import derive_seed
from .spectral import (
    alignment,
    extend_embedding,
    spectral_embed,
    write_embeddings_blob,
    write_embeddings_csv,
)
from .synth import GenerationConfig, default_motifs, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3

THREADS_ENV = "GCL_DATALAB_THREADS"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class InfeasibleError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> _Parser:
    parser = _Parser(prog="gcl-datalab")
    parser.add_argument("--config", default=None, help="JSON file mirroring flags")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=_default_threads())
    common.add_argument("--out-dir", default=".")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common])
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--style-ratio", type=float, required=True)
    p.add_argument("--copies-min", type=int, default=1)
    p.add_argument("--copies-max", type=int, default=3)
    p.add_argument("--jitter", type=int, default=2)
    p.add_argument("--edge-noise", type=float, default=0.10)
    p.add_argument("--feature-dim", type=int, default=10)
    p.add_argument("--name", default="dataset")

    p = sub.add_parser("augment", parents=[common])
    p.add_argument("--dataset", required=True)
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--per-sample", type=int, default=1)

    p = sub.add_parser("analyze", parents=[common])
    p.add_argument("--dataset", required=True)
    p.add_argument("--families", default="NodeDrop,EdgePerturb,AttrMask,Subgraph")
    p.add_argument("--gammas", default="0.1,0.2,0.3,0.4,0.5,0.6")
    p.add_argument("--mode", choices=["exact", "sampled"], default="sampled")
    p.add_argument("--budget", type=int, default=3,
                   help="samples per parent (sampled) or enumeration cap (exact)")
    p.add_argument("--partition-source", default="true-labels")

    p = sub.add_parser("embed-eval", parents=[common])
    p.add_argument("--datasets", default=None,
                   help="comma list of dataset JSONL paths (skips generation)")
    p.add_argument("--style-ratios", default="0.5,2.0,4.0")
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--families", default="ContentAwareEdgeDrop,EdgePerturb")
    p.add_argument("--gammas", default="0.2")
    p.add_argument("--budget", type=int, default=4, help="augmentations per parent")
    p.add_argument("--k", type=int, default=None,
                   help="embedding dimension (default: max(2r, #components))")
    p.add_argument("--n-augs", type=int, default=30)
    p.add_argument("--membership", choices=["provenance", "structural"],
                   default="structural")

    p = sub.add_parser("ged", parents=[common])
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--threshold", type=float, default=None)

    p = sub.add_parser("report", parents=[common])
    p.add_argument("--analysis", default=None, help="analysis CSV path")
    p.add_argument("--eval-summary", default=None, help="eval summary CSV path")
    p.add_argument("--scores", default=None, help="comma list of score CSVs")
    return parser


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def _config_to_dict(cfg: GenerationConfig) -> dict:
    return {
        "motifs": [
            {"n": m.n, "edges": [list(e) for e in m.sorted_edges()]}
            for m in cfg.motifs
        ],
        "samples_per_class": cfg.samples_per_class,
        "style_ratio": cfg.style_ratio,
        "motif_copies_range": list(cfg.motif_copies_range),
        "background_jitter": cfg.background_jitter,
        "edge_noise_fraction": cfg.edge_noise_fraction,
        "feature_dim": cfg.feature_dim,
        "master_seed": cfg.master_seed,
    }


def _write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(rows: list[dict], path: str) -> None:
    if not rows:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n")
        return
    fieldnames = list(rows[0].keys())
    for row in rows[1:]:
        for key in row:
            if key not in fieldnames:
                fieldnames.append(key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def _load_dataset(path: str) -> list[LabeledGraph]:
    if not os.path.exists(path):
        raise DataError(f"dataset not found: {path}")
    try:
        return read_jsonl(path)
    except RecordParseError as exc:
        raise DataError(f"bad dataset {path}: {exc}") from exc


def _load_single_graph(path: str) -> LabeledGraph:
    if not os.path.exists(path):
        raise DataError(f"graph file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read().strip()
    try:
        first_line = text.splitlines()[0] if text else ""
        return deserialize(json.loads(first_line))
    except (RecordParseError, json.JSONDecodeError, IndexError) as exc:
        raise DataError(f"bad graph file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.style_ratio < 0:
        raise UsageError("--style-ratio must be >= 0")
    motifs = default_motifs(args.feature_dim)
    if not (1 <= args.classes <= len(motifs)):
        raise UsageError(f"--classes must be in 1..{len(motifs)}")
    try:
        cfg = GenerationConfig(
            motifs=tuple(motifs[: args.classes]),
            samples_per_class=args.per_class,
            style_ratio=args.style_ratio,
            motif_copies_range=(args.copies_min, args.copies_max),
            background_jitter=args.jitter,
            edge_noise_fraction=args.edge_noise,
            feature_dim=args.feature_dim,
            master_seed=args.seed,
        )
    except GraphError as exc:
        raise UsageError(str(exc)) from exc
    ds = generate_dataset(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, f"{args.name}.jsonl")
    write_jsonl(list(ds.samples), out)
    _write_json(_config_to_dict(cfg), os.path.join(args.out_dir, f"{args.name}.config.json"))
    print(f"wrote {len(ds.samples)} samples to {out}")
    return EXIT_OK


def cmd_augment(args) -> int:
    samples = _load_dataset(args.dataset)
    spec = AugmentationSpec(args.family, args.gamma)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(
        args.out_dir, f"augmented_{args.family}_{args.gamma:g}.jsonl"
    )
    records = []
    for s in samples:
        for j in range(args.per_sample):
            seed = derive_seed(args.seed, "augment", s.graph.graph_id, j)
            records.append(apply_aug(s.graph, spec, seed, content_mask=s.content_mask))
    records.sort(key=lambda r: r.graph.graph_id)
    with open(out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), separators=(",", ":"), sort_keys=True))
            fh.write("\n")
    print(f"wrote {len(records)} augmentation records to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    samples = _load_dataset(args.dataset)
    families = _str_list(args.families)
    gammas = _float_list(args.gammas)
    if not families or not gammas:
        raise UsageError("empty family or gamma grid")
    for fam in families:
        if fam not in FAMILIES:
            raise UsageError(f"unknown family {fam!r}")
    mode = MODE_EXACT if args.mode == "exact" else MODE_SAMPLED
    if mode == MODE_EXACT:
        worst = 0
        for fam in families:
            spec = AugmentationSpec(fam, max(gammas))
            for s in samples:
                worst = max(
                    worst,
                    count_augmentations_upper_bound(
                        s.graph, spec, content_mask=s.content_mask
                    ),
                )
        if worst > args.budget:
            raise InfeasibleError(
                f"exact enumeration needs cap >= {worst}; rerun with "
                f"--mode sampled --budget <samples-per-parent> or --budget {worst}"
            )
    rows = []
    json_reports = []
    for fam in families:
        reports = analyze_sweep(
            samples,
            fam,
            gammas,
            samples_per_parent=args.budget,
            seed=derive_seed(args.seed, "analyze", fam),
            mode=mode,
            cap=args.budget,
            threads=args.threads,
            partition_source=args.partition_source,
        )
        for rep in reports:
            rows.append(rep.summary_row())
            payload = rep.summary_row()
            payload["inconsistent_ids"] = list(rep.inconsistent_ids)
            payload["alpha_clamped"] = rep.alpha_clamped
            payload["candidate_count"] = rep.candidate_count
            json_reports.append(payload)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(rows, os.path.join(args.out_dir, "analysis.csv"))
    _write_json(json_reports, os.path.join(args.out_dir, "analysis.json"))
    print(f"wrote {len(rows)} analysis rows to {args.out_dir}/analysis.csv")
    return EXIT_OK


def _eval_one(
    samples: list[LabeledGraph],
    style_ratio: float,
    family: str,
    gamma: float,
    args,
) -> tuple[dict, metrics.ScoreTable]:
    spec = AugmentationSpec(family, gamma)
    pag = build_pag(
        samples,
        spec,
        mode=MODE_SAMPLED,
        cap_or_sample_budget=args.budget,
        seed=derive_seed(args.seed, "pag", style_ratio, family, gamma),
        membership=args.membership,
        include_identity=True,
        threads=args.threads,
    )
    n_comp = len(set(pag.components()))
    r = max(pag.parent_labels) + 1
    k = args.k if args.k is not None else max(2 * r, n_comp)
    if k < 2 * r:
        print(f"warning: k={k} below 2r={2 * r}; honored", file=sys.stderr)
    k = min(k, pag.n_vertices)
    emb, evals = spectral_embed(pag, k)
    labels = pag.vertex_labels()
    split = metrics.stratified_split(
        labels, derive_seed(args.seed, "split", style_ratio, family, gamma)
    )
    knn = metrics.knn_evaluate(emb.rows, split)
    probe = metrics.linear_probe(
        emb.rows, split, seed=derive_seed(args.seed, "probe", style_ratio, family)
    )
    # positives: identity vertex with each of its parent's augmentation vertices
    by_parent: dict[int, list[int]] = {}
    for i, p in enumerate(pag.parent_index):
        by_parent.setdefault(p, []).append(i)
    pos_pairs = []
    for p, idxs in sorted(by_parent.items()):
        ident = [i for i in idxs if not pag.vertices[i].edit_path]
        rest = [i for i in idxs if pag.vertices[i].edit_path]
        if ident and rest:
            pos_pairs.extend((ident[0], j) for j in rest)
    align_val = alignment(emb.rows, pos_pairs) if pos_pairs else float("nan")

    ident_of_parent = {
        pag.parent_index[i]: i
        for i in range(pag.n_vertices)
        if not pag.vertices[i].edit_path
    }
    sample_rows = np.array([
        emb.rows[ident_of_parent[p]] for p in range(pag.natural_count)
    ])

    def embed_fn(obj):
        if isinstance(obj, LabeledGraph):
            pos = pag.parent_ids.index(obj.graph.graph_id)
            return sample_rows[pos]
        return extend_embedding(pag, emb, evals, obj)

    invariances = []
    for s in samples:
        inv = metrics.invariance_score(
            embed_fn,
            s,
            spec,
            derive_seed(args.seed, "invscore", style_ratio, family, s.graph.graph_id),
            n_augs=args.n_augs,
        )
        invariances.append(inv)
    table = metrics.score_table(
        [s.graph.graph_id for s in samples],
        [s.class_label for s in samples],
        invariances,
        sample_rows,
    )
    tag = f"{style_ratio:g}_{family}_{gamma:g}"
    write_embeddings_csv(emb, os.path.join(args.out_dir, f"embeddings_{tag}.csv"))
    write_embeddings_blob(emb, os.path.join(args.out_dir, f"embeddings_{tag}.bin"))
    table.write_csv(os.path.join(args.out_dir, f"scores_{tag}.csv"))
    row = {
        "style_ratio": style_ratio,
        "family": family,
        "gamma": gamma,
        "n_vertices": pag.n_vertices,
        "n_components": n_comp,
        "k": k,
        "knn_acc": knn.test_accuracy,
        "chosen_k": knn.chosen_k,
        "probe_acc": probe,
        "alignment": align_val,
        "invariance_median": table.median("invariance"),
        "separability_median": table.median("separability"),
    }
    return row, table


def cmd_embed_eval(args) -> int:
    families = _str_list(args.families)
    gammas = _float_list(args.gammas)
    for fam in families:
        if fam not in FAMILIES:
            raise UsageError(f"unknown family {fam!r}")
    os.makedirs(args.out_dir, exist_ok=True)
    datasets: list[tuple[float, list[LabeledGraph]]] = []
    if args.datasets:
        for i, path in enumerate(_str_list(args.datasets)):
            datasets.append((float(i), _load_dataset(path)))
    else:
        motifs = default_motifs()
        for ratio in _float_list(args.style_ratios):
            cfg = GenerationConfig(
                motifs=tuple(motifs[: args.classes]),
                samples_per_class=args.per_class,
                style_ratio=ratio,
                master_seed=derive_seed(args.seed, "gen", ratio),
            )
            datasets.append((ratio, list(generate_dataset(cfg).samples)))
    rows = []
    for ratio, samples in datasets:
        for fam in families:
            for gamma in gammas:
                row, _ = _eval_one(samples, ratio, fam, gamma, args)
                rows.append(row)
    _write_csv(rows, os.path.join(args.out_dir, "eval_summary.csv"))
    _write_json(rows, os.path.join(args.out_dir, "eval_summary.json"))
    print(f"wrote {len(rows)} summary rows to {args.out_dir}/eval_summary.csv")
    return EXIT_OK


def cmd_ged(args) -> int:
    g1 = _load_single_graph(args.g1).graph
    g2 = _load_single_graph(args.g2).graph
    if args.threshold is not None:
        verdict = ged_within(g1, g2, args.threshold)
        text = {True: "true", False: "false", None: "unknown"}[verdict]
        print(f"ged_within(threshold={args.threshold:g}): {text}")
        return EXIT_OK
    try:
        res = ged_exact(g1, g2)
    except GedSizeError as exc:
        raise InfeasibleError(
            f"{exc} (pass --threshold for a bounded decision)"
        ) from exc
    print(f"ged: {res.distance:g}")
    return EXIT_OK


def cmd_report(args) -> int:
    analysis = args.analysis or os.path.join(args.out_dir, "analysis.csv")
    summary = args.eval_summary or os.path.join(args.out_dir, "eval_summary.csv")
    scores = _str_list(args.scores) if args.scores else None
    made = report_mod.render_reports(
        out_dir=args.out_dir,
        analysis_csv=analysis if os.path.exists(analysis) else None,
        eval_summary_csv=summary if os.path.exists(summary) else None,
        score_csvs=scores,
    )
    if not made:
        raise DataError(
            "nothing to report: no analysis.csv or eval_summary.csv found"
        )
    print(f"wrote {len(made)} figures and plot manifest to {args.out_dir}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "augment": cmd_augment,
    "analyze": cmd_analyze,
    "embed-eval": cmd_embed_eval,
    "ged": cmd_ged,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # config file provides defaults; explicit flags override it
    if "--config" in argv:
        try:
            cfg_path = argv[argv.index("--config") + 1]
        except IndexError:
            print("usage error: --config needs a path", file=sys.stderr)
            return EXIT_USAGE
        if not os.path.exists(cfg_path):
            print(f"data error: config not found: {cfg_path}", file=sys.stderr)
            return EXIT_DATA
        try:
            with open(cfg_path, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            print(f"data error: bad config: {exc}", file=sys.stderr)
            return EXIT_DATA
        parser.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, RecordParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InfeasibleError, CapExceededError, GedSizeError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GraphError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
