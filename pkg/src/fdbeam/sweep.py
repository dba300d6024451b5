"""Exhaustive beam sweeps and the statistics computed over them."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .array import DB_FLOOR, to_db

SWEEP_SCHEMA_VERSION = 1
SWEEP_HEADER = ("theta_tx_deg", "theta_rx_deg", "inr_db")
RNG_CEILING_DB = 120.0
_ANGLE_EPS = 1e-9


class SweepDataError(ValueError):
    pass


@dataclass(frozen=True)
class SpatialProfile:
    angles: tuple

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        if not angles:
            raise ValueError("spatial profile must be non-empty")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("spatial profile must be strictly increasing")
        object.__setattr__(self, "angles", angles)

    def __len__(self):
        return len(self.angles)

    def __getitem__(self, i):
        return self.angles[i]

    def __iter__(self):
        return iter(self.angles)

    @property
    def step(self) -> Optional[float]:
        """Common spacing, or None for non-uniform (or single-angle) profiles."""
        if len(self.angles) < 2:
            return None
        d = np.diff(self.angles)
        return float(d[0]) if np.allclose(d, d[0], rtol=0, atol=1e-9) else None

    def text(self) -> str:
        step = self.step
        if len(self.angles) == 1:
            return f"{self.angles[0]:g}:1:{self.angles[0]:g}"
        if step is None:
            return ",".join(f"{a:g}" for a in self.angles)
        return f"{self.angles[0]:g}:{step:g}:{self.angles[-1]:g}"


def make_profile(start: float, step: float, stop: float) -> SpatialProfile:
    """Inclusive uniform grid ``start, start+step, ..., <= stop``."""
    if not step > 0:
        raise ValueError("profile step must be > 0")
    if stop < start:
        raise ValueError(f"empty profile {start}:{step}:{stop}")
    count = int(math.floor((stop - start) / step + _ANGLE_EPS)) + 1
    return SpatialProfile(tuple(start + i * step for i in range(count)))


def parse_profile(text: str) -> SpatialProfile:
    """``START:STEP:STOP`` (the CLI and config form)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"profile must look like START:STEP:STOP, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    return make_profile(start, step, stop)


@dataclass(frozen=True)
class InrMap:
    """Linear INR indexed ``values[i, j]`` for ``(tx_profile[i], rx_profile[j])``."""

    tx_profile: SpatialProfile
    rx_profile: SpatialProfile
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.tx_profile), len(self.rx_profile)):
            raise ValueError(f"grid {v.shape} does not match profiles "
                             f"({len(self.tx_profile)}, {len(self.rx_profile)})")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("INR values must be finite and non-negative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def db(self) -> np.ndarray:
        return to_db(self.values)

    def transpose(self) -> "InrMap":
        return InrMap(self.rx_profile, self.tx_profile, self.values.T)

    def argmax(self) -> tuple:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return self.tx_profile[i], self.rx_profile[j]

    def lookup(self, theta_tx: float, theta_rx: float) -> float:
        """Stored INR at a grid pair; used to replay selection on a dataset."""
        i = _index_of(self.tx_profile, theta_tx)
        j = _index_of(self.rx_profile, theta_rx)
        if i is None or j is None:
            raise SweepDataError(f"pair (theta_tx={theta_tx:g}, theta_rx={theta_rx:g}) is not in the sweep grid")
        return float(self.values[i, j])


def _index_of(profile: SpatialProfile, angle: float) -> Optional[int]:
    k = int(np.searchsorted(profile.angles, angle - _ANGLE_EPS))
    if k < len(profile) and abs(profile[k] - angle) <= _ANGLE_EPS:
        return k
    return None


def run_sweep(measure: Callable[[float, float], float], tx_profile: SpatialProfile,
              rx_profile: SpatialProfile, workers: Optional[int] = None) -> InrMap:
    """Evaluate ``measure`` on every (tx, rx) pair.

    ``measure`` must be pure; with ``workers`` set, rows are evaluated on a
    thread pool and the result is identical to the sequential sweep.
    """
    def row(i):
        t = tx_profile[i]
        out = np.empty(len(rx_profile))
        for j, r in enumerate(rx_profile):
            v = measure(t, r)
            if not (np.isfinite(v) and v >= 0):
                raise SweepDataError(f"measurement at (theta_tx={t}, theta_rx={r}) is {v}")
            out[j] = v
        return out

    idx = range(len(tx_profile))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, idx))
    else:
        rows = [row(i) for i in idx]
    return InrMap(tx_profile, rx_profile, np.vstack(rows))


class EmpiricalCdf:
    """Empirical distribution of dB samples.

    ``quantile`` uses the lower nearest-rank convention: the smallest sample
    ``s`` with ``prob(s) >= p``.
    """

    def __init__(self, samples_db):
        s = np.sort(np.asarray(samples_db, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("empty sample set")
        self.samples = s
        self.samples.setflags(write=False)

    def __len__(self):
        return self.samples.size

    def prob(self, x) -> float:
        """P(X <= x)."""
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def quantile(self, p: float) -> float:
        if not 0 <= p <= 1:
            raise ValueError("probability must lie in [0, 1]")
        k = max(int(math.ceil(p * self.samples.size - 1e-12)) - 1, 0)
        return float(self.samples[k])

    def fraction_above(self, x: float) -> float:
        return 1.0 - self.prob(x)

    def fraction_below(self, x: float) -> float:
        """P(X < x)."""
        return np.searchsorted(self.samples, x, side="left") / self.samples.size

    def curve(self):
        """Step-curve coordinates ``(x, F(x))`` suitable for plotting."""
        n = self.samples.size
        return self.samples, np.arange(1, n + 1) / n


def cdf(inr_map: InrMap) -> EmpiricalCdf:
    return EmpiricalCdf(inr_map.db)


def neighborhood_indices(profile: SpatialProfile, center_index: int, delta_deg: float) -> list:
    c = profile[center_index]
    return [i for i, a in enumerate(profile) if abs(a - c) <= delta_deg + _ANGLE_EPS]


@dataclass(frozen=True)
class NeighborhoodStats:
    inr_min: np.ndarray
    inr_rng: np.ndarray
    delta_tx: float
    delta_rx: float
    rng_undefined: np.ndarray

    @property
    def inr_min_db(self) -> np.ndarray:
        return to_db(self.inr_min)


def _window(profile: SpatialProfile, delta: float) -> Optional[int]:
    step = profile.step
    if len(profile) == 1:
        return 0
    if step is None:
        return None
    return int(math.floor(delta / step + _ANGLE_EPS))


def stats_maps(inr_map: InrMap, delta_tx: float, delta_rx: float,
               ceiling_db: float = RNG_CEILING_DB) -> NeighborhoodStats:
    """Neighbourhood minimum and max/min range (dB) around every grid cell.

    Neighbourhoods are truncated at the profile edges. Cells whose
    neighbourhood contains an exact zero get ``ceiling_db`` as their range
    and are flagged in ``rng_undefined``.
    """
    if delta_tx < 0 or delta_rx < 0:
        raise ValueError("neighbourhood half-widths must be >= 0")
    v = inr_map.values
    kt = _window(inr_map.tx_profile, delta_tx)
    kr = _window(inr_map.rx_profile, delta_rx)
    if kt is not None and kr is not None:
        # edge replication leaves min/max unchanged, so it equals truncation
        lo = minimum_filter1d(minimum_filter1d(v, 2 * kt + 1, axis=0, mode="nearest"),
                              2 * kr + 1, axis=1, mode="nearest")
        hi = maximum_filter1d(maximum_filter1d(v, 2 * kt + 1, axis=0, mode="nearest"),
                              2 * kr + 1, axis=1, mode="nearest")
    else:
        lo = np.empty_like(v)
        hi = np.empty_like(v)
        for i in range(v.shape[0]):
            ti = neighborhood_indices(inr_map.tx_profile, i, delta_tx)
            for j in range(v.shape[1]):
                block = v[np.ix_(ti, neighborhood_indices(inr_map.rx_profile, j, delta_rx))]
                lo[i, j], hi[i, j] = block.min(), block.max()
    undefined = lo <= 0
    safe_lo = np.where(undefined, 1.0, lo)
    safe_hi = np.where(undefined, 1.0, hi)
    rng_db = np.where(undefined, ceiling_db, 10.0 * np.log10(safe_hi / safe_lo))
    return NeighborhoodStats(lo, rng_db, float(delta_tx), float(delta_rx), undefined)


def cdf_of_stat(stats: NeighborhoodStats, which: str) -> EmpiricalCdf:
    if which == "min":
        return EmpiricalCdf(stats.inr_min_db)
    if which == "rng":
        return EmpiricalCdf(stats.inr_rng)
    raise ValueError(f"which must be 'min' or 'rng', got {which!r}")


def reciprocity_delta(map_a: InrMap, map_b: InrMap) -> float:
    """Largest |dB difference| between ``map_a`` and the transpose of ``map_b``."""
    if map_a.values.shape != map_b.values.T.shape:
        raise ValueError(f"incompatible maps {map_a.values.shape} and {map_b.values.shape}")
    return float(np.max(np.abs(map_a.db - map_b.db.T)))


# --- dataset files -------------------------------------------------------

def export_sweep(inr_map: InrMap, path, metadata: Optional[dict] = None) -> Path:
    """Write the CSV dataset plus a ``.meta.json`` sidecar; returns the CSV path."""
    path = Path(path)
    db = inr_map.db
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for i, t in enumerate(inr_map.tx_profile):
            for j, r in enumerate(inr_map.rx_profile):
                w.writerow((f"{t:.10g}", f"{r:.10g}", f"{db[i, j]:.10f}"))
    meta = {
        "schema_version": SWEEP_SCHEMA_VERSION,
        "tx_profile": inr_map.tx_profile.text(),
        "rx_profile": inr_map.rx_profile.text(),
        "cells": int(inr_map.values.size),
        "db_floor": DB_FLOOR,
    }
    meta.update(metadata or {})
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def import_sweep(path) -> InrMap:
    """Read a sweep CSV (ours or externally measured) back into an :class:`InrMap`."""
    path = Path(path)
    cells = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SWEEP_HEADER:
            raise SweepDataError(f"{path}: expected header {','.join(SWEEP_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SweepDataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                t, r, v = (float(x) for x in row)
            except ValueError as e:
                raise SweepDataError(f"{path}:{lineno}: {e}") from e
            if (t, r) in cells:
                raise SweepDataError(f"{path}:{lineno}: duplicate pair (theta_tx={t:g}, theta_rx={r:g})")
            cells[(t, r)] = v
    if not cells:
        raise SweepDataError(f"{path}: no data rows")
    tx = sorted({t for t, _ in cells})
    rx = sorted({r for _, r in cells})
    tx_p, rx_p = SpatialProfile(tuple(tx)), SpatialProfile(tuple(rx))
    for prof, side in ((tx_p, "tx"), (rx_p, "rx")):
        if len(prof) > 1 and prof.step is None:
            raise SweepDataError(f"{path}: {side} angles are not uniformly spaced")
    grid = np.empty((len(tx), len(rx)))
    for i, t in enumerate(tx):
        for j, r in enumerate(rx):
            if (t, r) not in cells:
                raise SweepDataError(f"{path}: missing cell (theta_tx={t:g}, theta_rx={r:g})")
            grid[i, j] = cells[(t, r)]
    return InrMap(tx_p, rx_p, 10.0 ** (grid / 10.0))
