"""Seeded random scenes for Monte-Carlo studies and property tests."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .array import ArrayGeometry
from .channel import NlosRay, Scatterer, Scene, UserNode


def random_scene(seed: int, num_users: int | None = None) -> Scene:
    """A lobby-like scene with everything drawn from ``seed``.

    Side-by-side arrays 10 cm apart, 1-5 scatterers, 2-4 users spread over
    the codebook span with up to two weaker NLOS rays each. Direct coupling
    is drawn from [-12, 10] dB so INR maps range from mostly-clean to
    heavily coupled.
    """
    rng = np.random.default_rng([seed, 0x5CE])
    scatterers = tuple(
        Scatterer(float(rng.uniform(-70, 70)), float(rng.uniform(1.5, 6.0)), float(rng.uniform(-6, 3)))
        for _ in range(int(rng.integers(1, 6))))
    n = int(rng.integers(2, 5)) if num_users is None else num_users
    # users at least ~15 deg apart so no two share a location
    base = np.sort(rng.choice(np.arange(-56, 57, 16), size=n, replace=False)).astype(float)
    users = []
    for az in base + rng.uniform(-4, 4, size=n):
        los = float(rng.uniform(0, 6))
        rays = tuple(
            NlosRay(float(rng.choice([s.azimuth_deg for s in scatterers])), los - float(rng.uniform(4, 15)))
            for _ in range(int(rng.integers(0, 3))))
        users.append(UserNode(float(az), float(rng.uniform(2, 8)), los, rays))
    return Scene(scatterers=scatterers, users=tuple(users), seed=int(seed),
                 direct_coupling_gain_db=float(rng.uniform(-12, 10)), name=f"random-{seed}")


def single_scatterer_scene(azimuth_deg: float, range_m: float = 3.0, gain_db: float = 0.0,
                           rx_rotation_deg: float = 0.0, seed: int = 0) -> Scene:
    """No direct coupling, one scatterer; the receive array optionally rotated.

    Rotating the receive array by ``phi`` sets its boresight to ``-phi``, so
    a ray at global azimuth ``az`` appears at local angle ``az + phi``.
    """
    rx = ArrayGeometry(position=(-0.05, 0.0, 0.0), boresight_deg=-float(rx_rotation_deg))
    return replace(Scene(), rx_array=rx, scatterers=(Scatterer(azimuth_deg, range_m, gain_db),),
                   direct_coupling_gain_db=None, seed=seed, name="single-scatterer")
