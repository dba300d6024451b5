"""Static figures: INR heatmaps, CDFs and per-pair bar charts."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweep import EmpiricalCdf, InrMap  # noqa: E402

# one colour scale for every heatmap so figures compare directly
HEATMAP_VMIN_DB = -10.0
HEATMAP_VMAX_DB = 40.0

_BAR_LABELS = {
    "normalized_se": "normalized sum spectral efficiency",
    "r_sum": "sum spectral efficiency (bps/Hz)",
    "inr_db": "INR (dB)",
}


def draw_heatmap(ax, inr_map: InrMap, vmin=HEATMAP_VMIN_DB, vmax=HEATMAP_VMAX_DB, cmap="viridis"):
    tx, rx = inr_map.tx_profile, inr_map.rx_profile
    extent = [tx[0], tx[-1], rx[0], rx[-1]]
    im = ax.imshow(inr_map.db.T, origin="lower", extent=extent, aspect="auto",
                   vmin=vmin, vmax=vmax, cmap=cmap, interpolation="nearest")
    ax.set_xlabel(r"transmit steering $\theta_{tx}$ (deg)")
    ax.set_ylabel(r"receive steering $\theta_{rx}$ (deg)")
    return im


def draw_cdfs(ax, cdfs: dict):
    lines = []
    for label, c in cdfs.items():
        x, y = c.curve()
        # prepend the zero-probability point so a one-sample CDF still draws a step
        x = np.concatenate([[x[0]], x])
        y = np.concatenate([[0.0], y])
        (line,) = ax.step(x, y, where="post", label=label)
        lines.append(line)
    ax.axvline(0.0, color="0.6", lw=0.8, ls=":")  # noise floor
    ax.set_xlabel("INR (dB)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1)
    if len(cdfs) > 1:
        ax.legend()
    return lines


def draw_bars(ax, records, algorithm="steer_plus", value="normalized_se", deltas=None):
    """Grouped bars: one group per (DL, UL) pair, one bar per neighbourhood size."""
    recs = [r for r in records if r.algorithm == algorithm]
    pairs = sorted({(r.dl_user, r.ul_user) for r in recs})
    deltas = sorted({r.delta_deg for r in recs}) if deltas is None else list(deltas)
    lookup = {(r.dl_user, r.ul_user, r.delta_deg): getattr(r, value) for r in recs}
    width = 0.8 / max(len(deltas), 1)
    x = np.arange(len(pairs))
    containers = []
    for k, d in enumerate(deltas):
        ys = [lookup.get((p[0], p[1], d), np.nan) for p in pairs]
        containers.append(ax.bar(x + (k - (len(deltas) - 1) / 2) * width, ys, width,
                                 label=f"$\\Delta\\theta$ = {d:g}°"))
    ax.set_xticks(x)
    ax.set_xticklabels([f"DL-{p[0] + 1}\nUL-{p[1] + 1}" for p in pairs], fontsize=8)
    ax.set_ylabel(_BAR_LABELS.get(value, value.replace("_", " ")))
    if deltas:
        ax.legend(fontsize=8)
    return containers


def render(kind: str, data, path, **kw) -> Path:
    """Draw ``data`` as ``kind`` (heatmap | cdf | bars) and save it to ``path``."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=kw.pop("figsize", (6, 4.5) if kind != "bars" else (10, 4)))
    try:
        if kind == "heatmap":
            im = draw_heatmap(ax, data, **kw)
            fig.colorbar(im, ax=ax, label="INR (dB)")
        elif kind == "cdf":
            draw_cdfs(ax, data if isinstance(data, dict) else {"INR": data}, **kw)
        elif kind == "bars":
            draw_bars(ax, data, **kw)
        else:
            raise ValueError(f"unknown plot kind {kind!r}")
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
    return path


__all__ = ["render", "draw_heatmap", "draw_cdfs", "draw_bars", "EmpiricalCdf"]
