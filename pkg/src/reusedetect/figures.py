"""Figure rendering for reports: score distribution and matched subgraph."""

from __future__ import annotations

import os

from .report import ReuseReport


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_figures(report: ReuseReport, out_dir: str) -> list[str]:
    """Write PNG figures for a report into ``out_dir``; returns the paths."""
    plt = _plt()
    os.makedirs(out_dir, exist_ok=True)
    written = []

    scores = sorted(e.score for e in report.evidence)
    fig, (ax_hist, ax_cdf) = plt.subplots(1, 2, figsize=(9, 3.5))
    if scores:
        ax_hist.hist(scores, bins=20, range=(0.0, 1.0), color="steelblue", edgecolor="black")
        ax_cdf.step(scores, [i / len(scores) for i in range(1, len(scores) + 1)],
                    where="post", color="steelblue")
        ax_cdf.set_xlim(0.0, 1.05)
        ax_cdf.set_ylim(0.0, 1.05)
    ax_hist.set_xlabel("pair similarity")
    ax_hist.set_ylabel("matched pairs")
    ax_hist.set_title("Score distribution")
    ax_cdf.set_xlabel("pair similarity")
    ax_cdf.set_ylabel("CDF")
    ax_cdf.set_title("Score CDF")
    fig.suptitle(f"{report.target} vs {report.candidate}"
                 f"  (program similarity {report.program_similarity:.3f})")
    fig.tight_layout()
    path = os.path.join(out_dir, "match_scores.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, max(3.0, 0.4 * len(report.subgraph.node_pairs) + 1)))
    pairs = report.subgraph.node_pairs
    y_of_t = {t: i for i, (t, _) in enumerate(pairs)}
    y_of_c = {c: i for i, (_, c) in enumerate(pairs)}
    for t, c in pairs:
        y = y_of_t[t]
        ax.plot([0, 1], [y, y_of_c[c]], linestyle="--", color="gray", zorder=1)
        ax.text(-0.05, y, t, ha="right", va="center", fontsize=8)
        ax.text(1.05, y_of_c[c], c, ha="left", va="center", fontsize=8)
        ax.scatter([0, 1], [y, y_of_c[c]], color=["firebrick", "steelblue"], zorder=2)
    for (t1, _), (t2, _) in report.subgraph.edges:
        ax.annotate("", xy=(-0.02, y_of_t[t2]), xytext=(-0.02, y_of_t[t1]),
                    arrowprops=dict(arrowstyle="->", color="firebrick",
                                    connectionstyle="arc3,rad=0.4"))
    for (_, c1), (_, c2) in report.subgraph.edges:
        ax.annotate("", xy=(1.02, y_of_c[c2]), xytext=(1.02, y_of_c[c1]),
                    arrowprops=dict(arrowstyle="->", color="steelblue",
                                    connectionstyle="arc3,rad=-0.4"))
    ax.set_xlim(-0.6, 1.6)
    ax.set_ylim(-1, max(1, len(pairs)))
    ax.axis("off")
    ax.set_title(f"Matched subgraph: {report.target} (left) vs {report.candidate} (right)")
    fig.tight_layout()
    path = os.path.join(out_dir, "matched_subgraph.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    return written
