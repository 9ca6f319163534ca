"""Matplotlib renderings of the report artifacts (saved next to the CSVs)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import DailyProfile
from .select import SelectionSweep


def plot_daily_profile(profile: DailyProfile, path: str | Path,
                       title: str = "") -> None:
    hours = [s / 3600.0 for s in range(len(profile.mean))]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(hours, profile.mean, lw=1.0, color="tab:blue", label="daily mean")
    ax.fill_between(hours, profile.mean - profile.std, profile.mean + profile.std,
                    alpha=0.3, color="tab:blue", label="daily std")
    ax.set_xlabel("hour of day")
    ax.set_ylabel("normalized potential")
    ax.set_xlim(0, 24)
    ax.set_title(title or f"daily profile ({profile.n_days} days, {profile.channel})")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_selection_sweep(sweep: SelectionSweep, path: str | Path,
                         all_features_score: float | None = None,
                         title: str = "") -> None:
    ks = sweep.ks
    mean = sweep.mean_macro_f1
    std = sweep.std_macro_f1
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, mean, lw=1.2, color="tab:blue", label="mean macro F1")
    lower = [m - s for m, s in zip(mean, std)]
    upper = [m + s for m, s in zip(mean, std)]
    ax.fill_between(ks, lower, upper, alpha=0.3, color="tab:blue", label="std")
    if all_features_score is not None:
        ax.axhline(all_features_score, ls="--", color="gray",
                   label="all features")
    ax.set_xlabel("number of selected features")
    ax.set_ylabel("macro F1 [%]")
    ax.set_title(title or "feature-selection sweep")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_pr_curves(curves: dict[str, tuple[list, float, float]],
                   path: str | Path, title: str = "") -> None:
    """curves: task -> (points, auc, baseline) with points (thr, prec, rec)."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    colors = plt.cm.tab10.colors
    for i, (task, (points, auc, baseline)) in enumerate(sorted(curves.items())):
        recalls = [p[2] for p in points]
        precisions = [p[1] for p in points]
        color = colors[i % len(colors)]
        ax.step(recalls, precisions, where="post", color=color, lw=1.2,
                label=f"{task} (AUC {auc:.2f})")
        ax.axhline(baseline, ls=":", color=color, lw=0.8)
    ax.plot([1.0], [1.0], marker="*", color="gray", ls="--", ms=10,
            label="ideal")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.05)
    ax.set_title(title or "precision-recall (minority class)")
    ax.legend(loc="lower left", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_search_trace(best_so_far: list[float], path: str | Path,
                      title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(range(1, len(best_so_far) + 1), best_so_far, lw=1.2,
            color="tab:green")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best validation macro F1 [%]")
    ax.set_title(title or "pipeline search progress")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
