"""Box plots of benchmark results, written as PNG files."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LABELS = {"rmsep": "RMSEP", "r2": "R$^2$", "accuracy": "accuracy"}


def _boxes(ax, groups, title):
    names = list(groups)
    ax.boxplot([groups[n] for n in names], showmeans=False)
    ax.set_xticks(np.arange(1, len(names) + 1))
    ax.set_xticklabels(names, rotation=30 if len(names) > 6 else 0, ha="right"
                       if len(names) > 6 else "center", fontsize=8)
    ax.set_title(title, fontsize=9)
    ax.grid(axis="y", alpha=0.3)


def plot_results(results, out_dir, prefix="box"):
    """One figure per metric and per varied factor (n_sets, A, K).

    Baseline runs appear as the n_sets=0 box in every panel. Returns the
    written file paths.
    """
    paths = []
    base = results[results["n_sets"] == 0]
    aug = results[results["n_sets"] > 0]
    for metric in results["metric"].unique():
        for factor in ("n_sets", "A", "K"):
            levels = sorted(aug[factor].dropna().unique())
            if factor != "n_sets" and len(levels) < 2:
                continue
            methods = sorted(aug["method"].unique()) or ["none"]
            fig, axes = plt.subplots(1, len(methods), figsize=(4.2 * len(methods), 3.4),
                                     squeeze=False, sharey=True)
            for ax, method in zip(axes[0], methods):
                groups = {}
                b = base[base["metric"] == metric]["value"].to_numpy()
                if b.size:
                    groups["none"] = b
                sub = aug[(aug["method"] == method) & (aug["metric"] == metric)]
                for lv in levels:
                    vals = sub[sub[factor] == lv]["value"].to_numpy()
                    if vals.size:
                        groups[f"{int(lv)}"] = vals
                _boxes(ax, groups, method if method != "none" else "")
                ax.set_xlabel(factor)
            axes[0][0].set_ylabel(LABELS.get(metric, metric))
            fig.tight_layout()
            path = os.path.join(out_dir, f"{prefix}_{metric}_by_{factor}.png")
            fig.savefig(path, dpi=110)
            plt.close(fig)
            paths.append(path)
    return paths
