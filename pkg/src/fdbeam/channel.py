"""Scene description and channel synthesis.

Conventions
-----------
Receive beams ``w`` come straight from :func:`fdbeam.array.synthesize_beam`.
With ``exp(-jkr)`` propagation the physical transmit drive that radiates
toward ``theta`` is the element-wise conjugate of that beam, so transmit
weights are ``f = synthesize_beam(...).conj()``. Under this convention the
self-interference matrix is the plain propagation kernel between elements,
reciprocity is exact (swapping array roles transposes ``H``), and every
formula keeps its textbook form ``|w^H H f|^2``, ``|h_tx^H f|^2``,
``|w^H h_rx|^2``.

Far-field entities (scatterers, users) use the plane-wave approximation:
each array sees them at ``azimuth - boresight``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .array import (
    DEFAULT_CARRIER_HZ,
    ArrayGeometry,
    element_positions,
    steering_matrix,
    wavelength,
)
from .metrics import LinkBudget

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Scatterer:
    azimuth_deg: float
    range_m: float
    reflection_gain_db: float = -10.0

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError(f"scatterer range must be > 0, got {self.range_m}")


@dataclass(frozen=True)
class NlosRay:
    azimuth_deg: float
    gain_db: float
    phase: Optional[float] = None  # radians; None draws it from the scene seed


@dataclass(frozen=True)
class UserNode:
    azimuth_deg: float
    range_m: float
    los_gain_db: float = 0.0
    nlos_rays: tuple = ()

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError(f"user range must be > 0, got {self.range_m}")
        rays = tuple(r if isinstance(r, NlosRay) else NlosRay(**r) for r in self.nlos_rays)
        for r in rays:
            if r.gain_db > self.los_gain_db:
                raise ValueError("NLOS ray gain exceeds the LOS gain")
        object.__setattr__(self, "nlos_rays", rays)

    def position(self) -> np.ndarray:
        az = np.deg2rad(self.azimuth_deg)
        return self.range_m * np.array([np.sin(az), np.cos(az), 0.0])


@dataclass(frozen=True)
class Scene:
    tx_array: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(position=(0.05, 0.0, 0.0)))
    rx_array: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(position=(-0.05, 0.0, 0.0)))
    scatterers: tuple = ()
    users: tuple = ()
    budget: LinkBudget = field(default_factory=LinkBudget)
    carrier_hz: float = DEFAULT_CARRIER_HZ
    seed: int = 0
    # None disables direct coupling entirely
    direct_coupling_gain_db: Optional[float] = -30.0
    crosslink_gain_db: float = -5.0
    name: str = "scene"

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ValueError("carrier_hz must be > 0")
        if np.allclose(self.tx_array.position, self.rx_array.position, atol=0.0, rtol=0.0):
            raise ValueError("transmit and receive arrays share a centre")
        object.__setattr__(self, "scatterers", tuple(
            s if isinstance(s, Scatterer) else Scatterer(**s) for s in self.scatterers))
        object.__setattr__(self, "users", tuple(
            u if isinstance(u, UserNode) else UserNode(**u) for u in self.users))

    @property
    def wavelength(self) -> float:
        return wavelength(self.carrier_hz)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tx_array"]["position"] = list(self.tx_array.position)
        d["rx_array"]["position"] = list(self.rx_array.position)
        for u in d["users"]:
            u["nlos_rays"] = [dict(r) for r in u["nlos_rays"]]
        d["scatterers"] = [dict(s) for s in d["scatterers"]]
        d["users"] = [dict(u) for u in d["users"]]
        return {"schema_version": SCHEMA_VERSION, **d}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "Scene":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class SiChannel:
    matrix: np.ndarray


@dataclass(frozen=True)
class LinkChannel:
    vector: np.ndarray


@dataclass(frozen=True)
class CrosslinkChannel:
    scalar: complex


class SceneError(ValueError):
    pass


_SCENE_KEYS = {"schema_version", "name", "tx_array", "rx_array", "scatterers", "users", "budget",
               "carrier_hz", "seed", "direct_coupling_gain_db", "crosslink_gain_db"}


def scene_from_dict(d: dict) -> Scene:
    unknown = set(d) - _SCENE_KEYS
    if unknown:
        raise SceneError(f"unknown scene keys: {sorted(unknown)}")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SceneError(f"unsupported scene schema_version {version}")
    kw = {k: v for k, v in d.items() if k != "schema_version"}
    try:
        for side in ("tx_array", "rx_array"):
            if side in kw:
                kw[side] = ArrayGeometry(**kw[side])
        if "budget" in kw:
            kw["budget"] = LinkBudget(**kw["budget"])
        if "users" in kw:
            kw["users"] = tuple(UserNode(**u) for u in kw["users"])
        if "scatterers" in kw:
            kw["scatterers"] = tuple(Scatterer(**s) for s in kw["scatterers"])
        return Scene(**kw)
    except TypeError as e:
        raise SceneError(str(e)) from e


def load_scene(path) -> Scene:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    if not isinstance(d, dict):
        raise SceneError(f"{path}: scene file must be a mapping")
    return scene_from_dict(d)


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(yaml.safe_dump(scene.to_dict(), sort_keys=False))


def default_scene_path() -> Path:
    return Path(__file__).parent / "data" / "lobby.yaml"


def default_scene() -> Scene:
    return load_scene(default_scene_path())


def swap_roles(scene: Scene) -> Scene:
    """Same hardware with the transmit and receive arrays exchanged."""
    return replace(scene, tx_array=scene.rx_array, rx_array=scene.tx_array)


def _amplitude_db(db: float) -> float:
    return 10.0 ** (db / 20.0)


def near_field_distances(scene: Scene) -> np.ndarray:
    """``r[m, n]``: distance from receive element m to transmit element n."""
    lam = scene.wavelength
    q = element_positions(scene.rx_array, lam)
    p = element_positions(scene.tx_array, lam)
    return np.linalg.norm(q[:, None, :] - p[None, :, :], axis=-1)


def si_channel(scene: Scene) -> SiChannel:
    """Spherical-wave direct coupling plus one far-field ray per scatterer."""
    lam = scene.wavelength
    k = 2 * np.pi / lam
    n_rx, n_tx = scene.rx_array.num_elements, scene.tx_array.num_elements
    H = np.zeros((n_rx, n_tx), dtype=complex)

    if scene.direct_coupling_gain_db is not None and np.isfinite(scene.direct_coupling_gain_db):
        r = near_field_distances(scene)
        if np.any(r == 0):
            raise ValueError("transmit and receive elements coincide")
        H += _amplitude_db(scene.direct_coupling_gain_db) * (lam / (4 * np.pi * r)) * np.exp(-1j * k * r)

    tx_c = np.asarray(scene.tx_array.position)
    rx_c = np.asarray(scene.rx_array.position)
    for s in scene.scatterers:
        th_tx = scene.tx_array.to_local(s.azimuth_deg)
        th_rx = scene.rx_array.to_local(s.azimuth_deg)
        if abs(th_tx) >= 90 or abs(th_rx) >= 90:
            continue  # behind one of the arrays
        az = np.deg2rad(s.azimuth_deg)
        pos = s.range_m * np.array([np.sin(az), np.cos(az), 0.0])
        path = np.linalg.norm(pos - tx_c) + np.linalg.norm(pos - rx_c)
        g = _amplitude_db(s.reflection_gain_db) * lam / (4 * np.pi * path) * np.exp(-1j * k * path)
        a_rx = steering_matrix(scene.rx_array, [th_rx])[:, 0]
        a_tx = steering_matrix(scene.tx_array, [th_tx])[:, 0]
        H += g * np.outer(a_rx, a_tx)
    return SiChannel(H)


def _ray_phases(scene: Scene, user_index: int) -> np.ndarray:
    user = scene.users[user_index]
    rng = np.random.default_rng([scene.seed, user_index])
    drawn = rng.uniform(0.0, 2 * np.pi, size=len(user.nlos_rays))
    return np.array([r.phase if r.phase is not None else ph for r, ph in zip(user.nlos_rays, drawn)])


def user_channel(scene: Scene, user_index: int, side: str) -> LinkChannel:
    """Downlink (``h_tx``) or uplink (``h_rx``) vector for one user.

    The downlink vector is stored conjugated so that ``h_tx^H f`` is the
    received amplitude for transmit drive ``f``.
    """
    if side not in ("downlink", "uplink"):
        raise ValueError(f"side must be 'downlink' or 'uplink', got {side!r}")
    if not 0 <= user_index < len(scene.users):
        raise IndexError(f"unknown user {user_index}")
    user = scene.users[user_index]
    geom = scene.tx_array if side == "downlink" else scene.rx_array
    lam = scene.wavelength
    fspl = lam / (4 * np.pi * user.range_m)
    k = 2 * np.pi / lam

    angles = [user.azimuth_deg] + [r.azimuth_deg for r in user.nlos_rays]
    gains = [user.los_gain_db] + [r.gain_db for r in user.nlos_rays]
    phases = np.concatenate([[-k * user.range_m], _ray_phases(scene, user_index)])

    h = np.zeros(geom.num_elements, dtype=complex)
    for az, g_db, ph in zip(angles, gains, phases):
        th = geom.to_local(az)
        if abs(th) >= 90:
            continue
        h += _amplitude_db(g_db) * fspl * np.exp(1j * ph) * steering_matrix(geom, [th])[:, 0]
    if side == "downlink":
        h = np.conj(h)
    return LinkChannel(h)


def crosslink_channel(scene: Scene, dl_user: int, ul_user: int) -> CrosslinkChannel:
    if dl_user == ul_user:
        raise ValueError("cross-link needs two distinct users")
    a = scene.users[dl_user].position()
    b = scene.users[ul_user].position()
    d = float(np.linalg.norm(a - b))
    if d == 0:
        raise ValueError(f"users {dl_user} and {ul_user} are co-located")
    lam = scene.wavelength
    h = _amplitude_db(scene.crosslink_gain_db) * lam / (4 * np.pi * d) * np.exp(-2j * np.pi * d / lam)
    return CrosslinkChannel(complex(h))


def perturb_inr(inr_linear, sigma_db: float, rng: np.random.Generator):
    """Log-normal measurement jitter: multiply by ``10**(x/10)``, x ~ N(0, sigma_db)."""
    if sigma_db < 0:
        raise ValueError("sigma_db must be >= 0")
    if sigma_db == 0:
        return inr_linear
    x = rng.normal(0.0, sigma_db, size=np.shape(inr_linear))
    out = np.asarray(inr_linear) * 10.0 ** (x / 10.0)
    return float(out) if out.ndim == 0 else out
