"""Uniform linear phased arrays with phase-only analog beamforming.

Angles are azimuth in degrees relative to array boresight, positive to the
right. Element ``n`` of the steering vector carries phase
``+2*pi*(d/lambda)*n*sin(theta)``; a receive beam is the matched
(unit-norm) copy of the steering vector, so the matched gain is exactly N.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 60e9
DB_FLOOR = -120.0
DEFAULT_BITS = 6


def wavelength(carrier_hz: float = DEFAULT_CARRIER_HZ) -> float:
    return SPEED_OF_LIGHT / carrier_hz


def to_db(x, floor: float = DB_FLOOR):
    """Linear power to dB, mapping exact zeros to ``floor``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(x)
    out = np.where(x > 0, out, floor)
    return float(out) if out.ndim == 0 else out


def to_linear(x_db):
    x_db = np.asarray(x_db, dtype=float)
    out = 10.0 ** (x_db / 10.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ArrayGeometry:
    """A horizontal ULA placed in the global frame.

    ``position`` is the array centre in metres. ``boresight_deg`` is the
    global azimuth the array faces; global azimuth 0 points along +y and
    increases toward +x.
    """

    num_elements: int = 16
    spacing_wavelengths: float = 0.5
    position: tuple = (0.0, 0.0, 0.0)
    boresight_deg: float = 0.0

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not self.spacing_wavelengths > 0:
            raise ValueError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths}")
        if len(self.position) != 3:
            raise ValueError("position must be a 3-D point")
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))

    def axis(self) -> np.ndarray:
        # unit vector along increasing element index: to the right of boresight
        b = np.deg2rad(self.boresight_deg)
        return np.array([np.cos(b), -np.sin(b), 0.0])

    def to_local(self, azimuth_deg: float) -> float:
        """Global azimuth to array-relative angle, wrapped to [-180, 180)."""
        return (azimuth_deg - self.boresight_deg + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class BeamWeights:
    weights: np.ndarray = field(repr=False)
    quantization_bits: Optional[int] = None

    def __len__(self):
        return len(self.weights)

    def conj(self) -> "BeamWeights":
        """Same beam expressed as a transmit drive (see channel module)."""
        return BeamWeights(np.conj(self.weights), self.quantization_bits)


@dataclass(frozen=True)
class Codebook:
    angles: tuple
    beams: tuple

    def __post_init__(self):
        if not self.angles:
            raise ValueError("codebook must be non-empty")
        if any(b <= a for a, b in zip(self.angles, self.angles[1:])):
            raise ValueError("codebook angles must be strictly increasing")

    def __len__(self):
        return len(self.angles)

    def __iter__(self):
        return iter(zip(self.angles, self.beams))


def _check_angle(theta: float):
    if not np.isfinite(theta) or abs(theta) > 90.0:
        raise ValueError(f"steering angle {theta} deg outside [-90, 90]")


def element_positions(geom: ArrayGeometry, wavelength_m: float = wavelength()) -> np.ndarray:
    """(N, 3) element coordinates in metres, centred on ``geom.position``."""
    n = np.arange(geom.num_elements) - (geom.num_elements - 1) / 2.0
    offsets = np.outer(n * geom.spacing_wavelengths * wavelength_m, geom.axis())
    return np.asarray(geom.position) + offsets


def steering_vector(geom: ArrayGeometry, theta: float) -> np.ndarray:
    _check_angle(theta)
    n = np.arange(geom.num_elements)
    return np.exp(1j * 2 * np.pi * geom.spacing_wavelengths * n * np.sin(np.deg2rad(theta)))


def steering_matrix(geom: ArrayGeometry, thetas: Sequence[float]) -> np.ndarray:
    """Columns are steering vectors; angles are not range-checked."""
    n = np.arange(geom.num_elements)[:, None]
    s = np.sin(np.deg2rad(np.asarray(thetas, dtype=float)))[None, :]
    return np.exp(1j * 2 * np.pi * geom.spacing_wavelengths * n * s)


def quantize_phase(phase: np.ndarray, bits: int) -> np.ndarray:
    step = 2 * np.pi / 2**bits
    return np.round(phase / step) * step


def synthesize_beam(geom: ArrayGeometry, theta: float, bits: Optional[int] = DEFAULT_BITS) -> BeamWeights:
    """Phase-only receive beam toward ``theta``.

    With ``bits`` set, each element phase is rounded to the nearest multiple
    of ``2*pi / 2**bits``. ``bits=None`` gives the ideal continuous-phase beam.
    """
    if bits is not None and bits < 1:
        raise ValueError(f"quantization bits must be >= 1, got {bits}")
    _check_angle(theta)
    n = np.arange(geom.num_elements)
    phase = 2 * np.pi * geom.spacing_wavelengths * n * np.sin(np.deg2rad(theta))
    if bits is not None:
        phase = quantize_phase(phase, bits)
    w = np.exp(1j * phase) / np.sqrt(geom.num_elements)
    return BeamWeights(w, bits)


def array_gain(weights: BeamWeights, geom: ArrayGeometry, theta) -> float:
    """Linear power gain ``|a(theta)^H w|^2``; vectorised over ``theta``."""
    w = np.asarray(weights.weights)
    if w.shape != (geom.num_elements,):
        raise ValueError(f"weights have length {w.shape}, array has {geom.num_elements} elements")
    scalar = np.ndim(theta) == 0
    if scalar:
        _check_angle(theta)
    a = steering_matrix(geom, np.atleast_1d(theta))
    g = np.abs(a.conj().T @ w) ** 2
    return float(g[0]) if scalar else g


def beam_pattern(weights: BeamWeights, geom: ArrayGeometry, profile, floor_db: float = DB_FLOOR) -> np.ndarray:
    profile = np.atleast_1d(np.asarray(profile, dtype=float))
    if profile.size == 0:
        raise ValueError("empty angle profile")
    return np.atleast_1d(to_db(array_gain(weights, geom, profile), floor=floor_db))


def make_codebook(start: float, stop: float, step: float, geom: ArrayGeometry,
                  bits: Optional[int] = DEFAULT_BITS) -> Codebook:
    if not step > 0:
        raise ValueError("codebook step must be > 0")
    if start > stop:
        raise ValueError(f"empty codebook range {start}..{stop}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    angles = tuple(float(start + i * step) for i in range(count))
    return Codebook(angles, tuple(synthesize_beam(geom, a, bits) for a in angles))


def _scan_grid(resolution: float) -> np.ndarray:
    if not resolution > 0:
        raise ValueError("scan resolution must be > 0")
    return np.linspace(-90.0, 90.0, int(round(180.0 / resolution)) + 1)


def half_power_beamwidth(weights: BeamWeights, geom: ArrayGeometry, resolution: float = 0.01) -> float:
    """Width in degrees of the contiguous region around the peak within 3 dB of it."""
    grid = _scan_grid(resolution)
    g = array_gain(weights, geom, grid)
    k = int(np.argmax(g))
    above = g >= g[k] / 2.0
    lo = k
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = k
    while hi < len(g) - 1 and above[hi + 1]:
        hi += 1
    return float(grid[hi] - grid[lo])


def peak_sidelobe_db(weights: BeamWeights, geom: ArrayGeometry, resolution: float = 0.01) -> float:
    """Highest sidelobe relative to the main-lobe peak, in dB."""
    grid = _scan_grid(resolution)
    g = array_gain(weights, geom, grid)
    k = int(np.argmax(g))
    # walk down from the peak to the first null on each side
    lo = k
    while lo > 0 and g[lo - 1] <= g[lo]:
        lo -= 1
    hi = k
    while hi < len(g) - 1 and g[hi + 1] <= g[hi]:
        hi += 1
    side = np.concatenate([g[:lo], g[hi + 1:]])
    if side.size == 0:
        return DB_FLOOR
    return float(to_db(side.max() / g[k]))
