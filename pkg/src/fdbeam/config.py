"""Experiment configuration files (YAML).

Example::

    scene: lobby            # built-in name or path relative to this file
    deltas: "0:1:6"         # or a list, e.g. [0, 2, 3, 6]
    steer_inr_target_db: 0
    plus_inr_target_db: inf
    plus_se_target: inf
    pairs: all              # or [[0, 1], [2, 3]]
    output: out/lobby

Every key is optional except ``scene``; see :data:`DEFAULTS`.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import yaml

from .channel import Scene, load_scene

SEED_ENV = "FDBEAM_SEED"
BUILTIN_SCENES = ("lobby", "lab")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scene: str
    seed: Optional[int] = None
    tx_profile: str = "-64:1:64"
    rx_profile: str = "-64:1:64"
    codebook: str = "-60:8:60"
    bits: Optional[int] = 6
    deltas: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    res_deg: float = 1.0
    steer_inr_target_db: float = 0.0
    plus_inr_target_db: float = math.inf
    plus_se_target: float = math.inf
    pairs: object = "all"
    crosslink: object = "measured"
    inr_jitter_db: float = 0.0
    output: str = "out"
    plots: bool = True
    base_dir: str = "."

    def scene_path(self) -> Path:
        if self.scene in BUILTIN_SCENES:
            return Path(__file__).parent / "data" / f"{self.scene}.yaml"
        p = Path(self.scene)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def load_scene(self) -> Scene:
        scene = load_scene(self.scene_path())
        seed = os.environ.get(SEED_ENV) if self.seed is None else self.seed
        return scene if seed is None else scene.with_seed(int(seed))

    def user_pairs(self, num_users: int) -> list:
        if self.pairs == "all":
            return [(d, u) for d in range(num_users) for u in range(num_users) if d != u]
        return [tuple(p) for p in self.pairs]

    def crosslink_db(self) -> Optional[float]:
        """Fixed cross-link INR in dB, or None to use the scene's own value."""
        return None if self.crosslink == "measured" else float(self.crosslink)


DEFAULTS = {f.name: f.default for f in fields(ExperimentConfig) if f.name not in ("scene", "base_dir")}


def parse_range(text) -> tuple:
    """``"0:1:6"`` -> (0, 1, ..., 6); ``"0,3,6"``, a number or a list pass through."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    if "," in str(text):
        return tuple(float(x) for x in str(text).split(","))
    parts = str(text).split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ValueError(f"range must be START:STEP:STOP, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"empty range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(n))


def _float(v, key):
    if isinstance(v, bool):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "-inf"):
        return float(v)
    if isinstance(v, (int, float)):
        return float(v)
    raise ConfigError(f"{key}: expected a number (or 'inf'), got {v!r}")


def _profile(v, key):
    try:
        start, step, stop = (float(x) for x in str(v).split(":"))
    except ValueError:
        raise ConfigError(f"{key}: expected START:STEP:STOP, got {v!r}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"{key}: empty range {v!r}")
    return str(v)


def config_from_dict(d: dict, base_dir=".") -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    unknown = sorted(set(d) - set(DEFAULTS) - {"scene"})
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "scene" not in d:
        raise ConfigError("scene: required (a built-in name or a path)")
    if not isinstance(d["scene"], str):
        raise ConfigError(f"scene: expected a string, got {d['scene']!r}")

    kw = {"scene": d["scene"], "base_dir": str(base_dir)}
    for key, val in d.items():
        if key == "scene":
            continue
        if key in ("tx_profile", "rx_profile", "codebook"):
            kw[key] = _profile(val, key)
        elif key in ("res_deg", "steer_inr_target_db", "plus_inr_target_db", "plus_se_target", "inr_jitter_db"):
            kw[key] = _float(val, key)
        elif key == "deltas":
            try:
                kw[key] = parse_range(val)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"deltas: {e}") from None
            if not kw[key]:
                raise ConfigError("deltas: must be non-empty")
            if any(x < 0 for x in kw[key]):
                raise ConfigError("deltas: values must be >= 0")
        elif key in ("seed", "bits"):
            if val is not None and (isinstance(val, bool) or not isinstance(val, int)):
                raise ConfigError(f"{key}: expected an integer or null, got {val!r}")
            kw[key] = val
        elif key == "pairs":
            if val != "all":
                ok = isinstance(val, list) and all(
                    isinstance(p, list) and len(p) == 2 and all(isinstance(i, int) for i in p) and p[0] != p[1]
                    for p in val)
                if not ok:
                    raise ConfigError(f"pairs: expected 'all' or a list of [dl, ul] index pairs, got {val!r}")
            kw[key] = val
        elif key == "crosslink":
            if val != "measured":
                kw[key] = _float(val, key)
            else:
                kw[key] = val
        elif key == "plots":
            if not isinstance(val, bool):
                raise ConfigError(f"plots: expected true/false, got {val!r}")
            kw[key] = val
        elif key == "output":
            if not isinstance(val, str):
                raise ConfigError(f"output: expected a string, got {val!r}")
            kw[key] = val
    if kw.get("res_deg", 1.0) <= 0:
        raise ConfigError("res_deg: must be > 0")
    cfg = ExperimentConfig(**kw)
    if not cfg.scene_path().is_file():
        raise ConfigError(f"scene: file not found: {cfg.scene_path()}")
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        d = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"{path}: {e}") from None
    try:
        return config_from_dict(d or {}, base_dir=path.parent)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
