"""Figure rendering for analysis and evaluation artifacts.

Renders matplotlib figures next to the delimited outputs they were derived
from and records every figure in a small JSON manifest. The CSVs remain the
data contract; figures are a convenience view of them.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _read_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


def _save(fig, out_dir: str, name: str, manifest: list[dict], source: str, kind: str) -> str:
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    path = os.path.join(fig_dir, name)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    manifest.append({"path": os.path.relpath(path, out_dir), "source_csv": source, "kind": kind})
    return path


def _analysis_figures(rows: list[dict], out_dir: str, source: str, manifest: list[dict]) -> None:
    families = sorted({r["family"] for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(9.5, 3.6))
    for fam in families:
        sub = sorted(
            (r for r in rows if r["family"] == fam), key=lambda r: float(r["gamma"])
        )
        gammas = [float(r["gamma"]) for r in sub]
        axes[0].plot(gammas, [float(r["mu"]) for r in sub], marker="o", label=fam)
        axes[1].plot(
            gammas, [float(r["bound_value"]) for r in sub], marker="o", label=fam
        )
    axes[0].set_xlabel("augmentation strength")
    axes[0].set_ylabel("cross-partition pairs")
    axes[1].set_xlabel("augmentation strength")
    axes[1].set_ylabel("generalization bound")
    axes[1].set_yscale("symlog")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "analysis_sweep.png", manifest, source, "mu-and-bound-vs-strength")

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for fam in families:
        sub = sorted(
            (r for r in rows if r["family"] == fam), key=lambda r: float(r["gamma"])
        )
        ax.plot(
            [float(r["gamma"]) for r in sub],
            [float(r["alpha_lower"]) for r in sub],
            marker="s",
            label=fam,
        )
    ax.set_xlabel("augmentation strength")
    ax.set_ylabel("recoverability error lower bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "alpha_sweep.png", manifest, source, "alpha-vs-strength")


def _eval_figures(rows: list[dict], out_dir: str, source: str, manifest: list[dict]) -> None:
    combos = sorted({(r["family"], r["gamma"]) for r in rows})
    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    for fam, gamma in combos:
        sub = sorted(
            (r for r in rows if r["family"] == fam and r["gamma"] == gamma),
            key=lambda r: float(r["style_ratio"]),
        )
        ax.plot(
            [float(r["style_ratio"]) for r in sub],
            [100.0 * float(r["knn_acc"]) for r in sub],
            marker="o",
            label=f"{fam} @ {float(gamma):g}",
        )
    ax.set_xlabel("style ratio")
    ax.set_ylabel("kNN accuracy (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "knn_vs_style.png", manifest, source, "knn-vs-style-ratio")

    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    for fam, gamma in combos:
        sub = sorted(
            (r for r in rows if r["family"] == fam and r["gamma"] == gamma),
            key=lambda r: float(r["style_ratio"]),
        )
        ax.plot(
            [float(r["style_ratio"]) for r in sub],
            [100.0 * float(r["probe_acc"]) for r in sub],
            marker="s",
            label=f"{fam} @ {float(gamma):g}",
        )
    ax.set_xlabel("style ratio")
    ax.set_ylabel("linear probe accuracy (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "probe_vs_style.png", manifest, source, "probe-vs-style-ratio")


def _score_figures(paths: list[str], out_dir: str, manifest: list[dict]) -> None:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for path in paths:
        rows = _read_csv(path)
        inv = [float(r["invariance"]) for r in rows if r["invariance"] != "nan"]
        sep = [float(r["separability"]) for r in rows if r["separability"] != "nan"]
        label = os.path.splitext(os.path.basename(path))[0].replace("scores_", "")
        ax.scatter(inv[: len(sep)], sep[: len(inv)], s=12, alpha=0.6, label=label)
    ax.set_xlabel("invariance")
    ax.set_ylabel("separability")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(
        fig,
        out_dir,
        "invariance_vs_separability.png",
        manifest,
        ";".join(paths),
        "invariance-vs-separability",
    )


def render_reports(
    out_dir: str,
    analysis_csv: str | None = None,
    eval_summary_csv: str | None = None,
    score_csvs: list[str] | None = None,
) -> list[dict]:
    """Render figures for whichever artifacts exist; returns the manifest."""
    manifest: list[dict] = []
    if analysis_csv:
        rows = _read_csv(analysis_csv)
        if rows:
            _analysis_figures(rows, out_dir, os.path.basename(analysis_csv), manifest)
    if eval_summary_csv:
        rows = _read_csv(eval_summary_csv)
        if rows:
            _eval_figures(rows, out_dir, os.path.basename(eval_summary_csv), manifest)
    if score_csvs is None and eval_summary_csv:
        base = os.path.dirname(eval_summary_csv) or "."
        score_csvs = sorted(
            os.path.join(base, f)
            for f in os.listdir(base)
            if f.startswith("scores_") and f.endswith(".csv")
        )
    if score_csvs:
        existing = [p for p in score_csvs if os.path.exists(p)]
        if existing:
            _score_figures(existing, out_dir, manifest)
    if manifest:
        with open(os.path.join(out_dir, "plot_manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return manifest
