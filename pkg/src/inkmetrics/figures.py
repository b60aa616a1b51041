"""Figure and ink-output rendering for the CLI report paths.

Matplotlib figures are written next to the delimited outputs; the Agg backend
is forced so rendering works headless, and metadata is pinned so identical runs
produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .basis import SeriesPair, evaluate
from .detect import LocatedPoint, MetricLines, curve_bounds
from .ink import InkSymbol, ParameterizedTrace, serialize_ink
from .space import LINE_TYPES, SymbolVector

_PNG_META = {"Software": "inkmetrics"}

_LINE_COLORS = {
    "baseline": "#d62728",
    "xline": "#1f77b4",
    "ascender": "#2ca02c",
    "capline": "#9467bd",
    "descender": "#8c564b",
}


def sample_curve(sv: SymbolVector, n: int = 128) -> np.ndarray:
    """Page-space polyline of the reconstructed symbol, n points."""
    s = np.linspace(0.0, 1.0, n)
    x, y = evaluate(sv.series(), s)
    px, py = sv.transform.apply(x, y)
    return np.column_stack([px, py])


def symbols_to_ink(symbols: list[SymbolVector], n: int = 128) -> str:
    """Serialize reconstructed symbols in the ink interchange format.

    The reconstruction is one continuous curve per symbol (stroke joins were
    concatenated before projection), so each symbol is written as one stroke.
    """
    out = []
    for sv in symbols:
        pts = sample_curve(sv, n)
        out.append(InkSymbol(strokes=(tuple(map(tuple, pts)),), class_label=sv.class_label))
    return serialize_ink(out)


def _save(fig, path: str):
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def plot_approximation(trace: ParameterizedTrace, series: SeriesPair, path: str,
                       title: str = "") -> None:
    """Original trace points against the reconstructed series curve."""
    fig, ax = plt.subplots(figsize=(5, 5))
    s = np.linspace(0.0, 1.0, 512)
    x, y = evaluate(series, s)
    ax.plot(trace.xy[:, 0], trace.xy[:, 1], ".", ms=2.5, color="#999999", label="trace")
    ax.plot(x, y, "-", lw=1.5, color="#d62728", label="series")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    _save(fig, path)


def plot_detection(sv: SymbolVector, points: list[LocatedPoint], metrics: MetricLines,
                   path: str, title: str = "") -> None:
    """Reconstructed curve with located determining points and metric lines."""
    fig, ax = plt.subplots(figsize=(5, 5))
    poly = sample_curve(sv, 512)
    ax.plot(poly[:, 0], poly[:, 1], "-", lw=1.5, color="#333333")
    x0, x1, _, _ = curve_bounds(sv)
    pad = 0.15 * max(x1 - x0, 1e-9)
    for t in LINE_TYPES:
        lv = metrics.line(t)
        if lv is not None:
            ax.hlines(lv, x0 - pad, x1 + pad, colors=_LINE_COLORS[t], lw=0.8, label=t)
    for p in points:
        marker = "x" if p.failed else "o"
        ax.plot([p.x], [p.y], marker, color=_LINE_COLORS[p.line_type], ms=7,
                mfc="none", mew=1.6)
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=7)
    if title:
        ax.set_title(title, fontsize=10)
    _save(fig, path)


def plot_error_table(steps, rates_percent, path: str) -> None:
    """Error rate against homotopy step count."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(steps, rates_percent, "o-", color="#1f77b4")
    ax.set_xlabel("homotopy steps")
    ax.set_ylabel("error rate (%)")
    ax.set_xscale("log")
    ax.set_xticks(list(steps))
    ax.set_xticklabels([str(m) for m in steps])
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_neaten(before: list[SymbolVector], after: list[SymbolVector], path: str) -> None:
    """Before/after panels for a neatened line."""
    fig, axes = plt.subplots(2, 1, figsize=(7, 5))
    for ax, group, label in ((axes[0], before, "original"), (axes[1], after, "neatened")):
        for sv in group:
            poly = sample_curve(sv, 256)
            ax.plot(poly[:, 0], poly[:, 1], "-", lw=1.3, color="#333333")
        ax.set_aspect("equal")
        ax.set_title(label, fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def write_svg_before_after(before: list[SymbolVector], after: list[SymbolVector],
                           path: str, samples: int = 128) -> None:
    """Minimal deterministic SVG with the original and neatened polylines."""
    groups = [("original", before, "#888888"), ("neatened", after, "#d62728")]
    all_pts = np.vstack([sample_curve(sv, samples) for _, svs, _ in groups for sv in svs])
    xmin, ymin = all_pts.min(axis=0)
    xmax, ymax = all_pts.max(axis=0)
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-9)
    xmin, xmax, ymin, ymax = xmin - pad, xmax + pad, ymin - pad, ymax + pad
    w, h = xmax - xmin, ymax - ymin
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.4f} {h:.4f}" '
        f'width="{w:.4f}" height="{h:.4f}">',
    ]
    for name, svs, color in groups:
        lines.append(f'<g id="{name}" fill="none" stroke="{color}" stroke-width="{0.01 * w:.4f}">')
        for sv in svs:
            pts = sample_curve(sv, samples)
            # SVG y axis points down; flip from the canonical y-up page frame
            coords = " ".join(f"{x - xmin:.4f},{ymax - y:.4f}" for x, y in pts)
            lines.append(f'<polyline points="{coords}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
