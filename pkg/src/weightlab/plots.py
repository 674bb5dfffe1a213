"""Figure rendering for probe reports.

Figures are written next to the delimited output: a singular-value decay
panel (log scale, one curve per depth) and a tail-ratio trend panel (one
line per tail index across depths). Rendering is file-only; no interactive
backend is ever required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_probe_figure(outputs: dict, path: str) -> str:
    """Render decay curves and tail trends from a probe record to ``path``."""
    curves = outputs.get("curves", {})
    rows = outputs.get("rows", [])
    fig, (ax_curve, ax_trend) = plt.subplots(1, 2, figsize=(10, 4))

    for depth, sigma in sorted(curves.items(), key=lambda kv: int(kv[0])):
        ax_curve.semilogy(range(1, len(sigma) + 1), sigma, label=f"L={depth}")
    ax_curve.set_xlabel("singular value index")
    ax_curve.set_ylabel("$\\sigma_k$")
    ax_curve.set_title(f"{outputs.get('kernel', '')} / {outputs.get('symbol', '')}")
    if curves:
        ax_curve.legend()

    by_k: dict[int, list[tuple[int, float]]] = {}
    for row in rows:
        by_k.setdefault(row["k"], []).append((row["depth"], row["ratio"]))
    for k, pts in sorted(by_k.items()):
        pts.sort()
        ax_trend.semilogy([d for d, _ in pts], [max(v, 1e-300) for _, v in pts], "o-", label=f"k={k}")
    ax_trend.set_xlabel("depth L")
    ax_trend.set_ylabel("$\\sigma_k/\\sigma_1$")
    ax_trend.set_title("tail ratios across refinement")
    if by_k:
        ax_trend.legend()

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_weight_figure(weight_values, path: str, title: str = "weight") -> str:
    """Profile plot of a weight (1-d) or heat map (2-d)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    arr = weight_values
    if arr.ndim == 1:
        ax.semilogy(arr)
        ax.set_xlabel("cell")
        ax.set_ylabel("w")
    else:
        im = ax.imshow(arr, origin="lower")
        fig.colorbar(im, ax=ax)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
