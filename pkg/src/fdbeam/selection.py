"""Beam alignment and neighbourhood-based beam refinement for full-duplex.

``steer`` shifts the aligned beams to the nearest pair whose measured
self-interference meets a target (or the neighbourhood minimum, if the
target is unreachable). ``steer_plus`` walks the same neighbourhood in
order of increasing deviation, measuring link SNRs only for pairs that pass
the interference threshold, and stops once the sum spectral efficiency
reaches its target.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from . import metrics
from .array import Codebook, to_db, to_linear

_EPS = 1e-9


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class InitialSelection:
    theta_dl_init: float
    theta_ul_init: float
    snr_dl_init: float
    snr_ul_init: float


@dataclass(frozen=True)
class SteerParams:
    delta_tx_deg: float = 3.0
    delta_rx_deg: float = 3.0
    res_tx_deg: float = 1.0
    res_rx_deg: float = 1.0
    inr_target_db: float = 0.0

    def __post_init__(self):
        if self.delta_tx_deg < 0 or self.delta_rx_deg < 0:
            raise ValueError("neighbourhood half-widths must be >= 0")
        if not (self.res_tx_deg > 0 and self.res_rx_deg > 0):
            raise ValueError("resolutions must be > 0")
        if math.isnan(self.inr_target_db):
            raise ValueError("inr_target_db is NaN")


@dataclass(frozen=True)
class SteerPlusParams(SteerParams):
    inr_target_db: float = math.inf
    se_target: float = math.inf

    def __post_init__(self):
        super().__post_init__()
        if not self.se_target >= 0:
            raise ValueError("se_target must be >= 0")


@dataclass
class MeasurementLedger:
    inr_measurements: int = 0
    snr_dl_measurements: int = 0
    snr_ul_measurements: int = 0
    cache_hits: int = 0


@dataclass(frozen=True)
class SelectionResult:
    algorithm: str
    theta_tx_star: float
    theta_rx_star: float
    inr_db: float
    sinr_dl_db: Optional[float]
    sinr_ul_db: Optional[float]
    r_dl: Optional[float]
    r_ul: Optional[float]
    r_sum: Optional[float]
    deviation_metric: float
    fallback_used: bool
    ledger: MeasurementLedger = field(default_factory=MeasurementLedger)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = repr(v)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def beam_align(codebook: Codebook, snr_fn: Callable[[float], float]) -> float:
    """Codebook angle with the highest SNR; ties go to the smaller angle."""
    best_angle, best = None, -math.inf
    for angle in codebook.angles:
        s = snr_fn(angle)
        if s > best:
            best_angle, best = angle, s
    return best_angle if best_angle is not None else codebook.angles[0]


def initial_selection(codebook_tx: Codebook, codebook_rx: Codebook, snr_dl_fn, snr_ul_fn) -> InitialSelection:
    t = beam_align(codebook_tx, snr_dl_fn)
    r = beam_align(codebook_rx, snr_ul_fn)
    return InitialSelection(t, r, snr_dl_fn(t), snr_ul_fn(r))


def neighborhood_offsets(delta_deg: float, res_deg: float) -> list:
    """``m * res`` for ``m`` in ``[-floor(delta/res), floor(delta/res)]``."""
    k = int(math.floor(delta_deg / res_deg + _EPS))
    return [m * res_deg for m in range(-k, k + 1)]


def deviation_key(d_tx: float, d_rx: float) -> tuple:
    return (d_tx * d_tx + d_rx * d_rx, abs(d_tx), d_tx, d_rx)


def sorted_candidates(offsets_tx, offsets_rx) -> list:
    """All offset pairs by increasing squared deviation, ties lexicographic."""
    pairs = [(dt, dr) for dt in offsets_tx for dr in offsets_rx]
    return sorted(pairs, key=lambda p: deviation_key(*p))


def _candidates(init: InitialSelection, params: SteerParams):
    offs = sorted_candidates(neighborhood_offsets(params.delta_tx_deg, params.res_tx_deg),
                             neighborhood_offsets(params.delta_rx_deg, params.res_rx_deg))
    return [(init.theta_dl_init + dt, init.theta_ul_init + dr, dt, dr) for dt, dr in offs]


def _checked(value: float, what: str, where) -> float:
    if not (math.isfinite(value) and value >= 0):
        raise MeasurementError(f"{what} measurement at {where} is {value}")
    return value


def _result(algorithm, t, r, dt, dr, inr, snr_dl, snr_ul, inr_cl, fallback, ledger) -> SelectionResult:
    if snr_dl is None or snr_ul is None:
        sinr_dl = sinr_ul = r_dl = r_ul = r_sum = None
    else:
        rates = metrics.sum_rate(snr_dl, snr_ul, inr, inr_cl)
        sinr_dl = to_db(metrics.sinr(snr_dl, inr_cl))
        sinr_ul = to_db(metrics.sinr(snr_ul, inr))
        r_dl, r_ul, r_sum = rates.r_dl, rates.r_ul, rates.r_sum
    return SelectionResult(algorithm, t, r, to_db(inr), sinr_dl, sinr_ul, r_dl, r_ul, r_sum,
                           dt * dt + dr * dr, fallback, ledger)


def steer(init: InitialSelection, params: SteerParams, inr_fn: Callable[[float, float], float],
          snr_dl_fn: Optional[Callable] = None, snr_ul_fn: Optional[Callable] = None,
          inr_cl: float = 0.0) -> SelectionResult:
    """Minimal-deviation pair meeting ``max(INR target, neighbourhood minimum)``.

    The whole neighbourhood grid is measured. If SNR functions are given the
    selected pair is evaluated once on each link (counted in the ledger) so
    the result carries SINRs and rates.
    """
    ledger = MeasurementLedger()
    cands = _candidates(init, params)
    inrs = []
    for t, r, _, _ in cands:
        inrs.append(_checked(inr_fn(t, r), "INR", (t, r)))
        ledger.inr_measurements += 1
    threshold = max(to_linear(params.inr_target_db), min(inrs))
    k = next(i for i, v in enumerate(inrs) if v <= threshold)
    t, r, dt, dr = cands[k]

    snr_dl = snr_ul = None
    if snr_dl_fn is not None and snr_ul_fn is not None:
        snr_dl = _checked(snr_dl_fn(t), "downlink SNR", t)
        snr_ul = _checked(snr_ul_fn(r), "uplink SNR", r)
        ledger.snr_dl_measurements += 1
        ledger.snr_ul_measurements += 1
    return _result("steer", t, r, dt, dr, inrs[k], snr_dl, snr_ul, inr_cl, False, ledger)


def steer_plus(init: InitialSelection, params: SteerPlusParams, inr_fn, snr_dl_fn, snr_ul_fn,
               inr_cl: float) -> SelectionResult:
    """Iterative search with measurement caching.

    Follows the loop exactly: candidates in sorted order, SNRs only for pairs
    at or below the INR target, incumbent replaced on strictly greater sum
    rate (starting from 0), early exit once the incumbent reaches
    ``se_target``. When no pair meets the INR target the initial pair is
    returned with ``fallback_used`` set.
    """
    ledger = MeasurementLedger()
    inr_target = to_linear(params.inr_target_db)
    inr_cache, dl_cache, ul_cache = {}, {}, {}

    def measured(cache, key, fn, what, counter):
        if key in cache:
            ledger.cache_hits += 1
            return cache[key]
        val = _checked(fn(*key) if isinstance(key, tuple) else fn(key), what, key)
        cache[key] = val
        setattr(ledger, counter, getattr(ledger, counter) + 1)
        return val

    best = None  # (t, r, dt, dr, inr, snr_dl, snr_ul)
    r_max = 0.0
    any_qualified = False
    for t, r, dt, dr in _candidates(init, params):
        inr = measured(inr_cache, (t, r), inr_fn, "INR", "inr_measurements")
        if inr > inr_target:
            continue
        any_qualified = True
        s_dl = measured(dl_cache, t, snr_dl_fn, "downlink SNR", "snr_dl_measurements")
        s_ul = measured(ul_cache, r, snr_ul_fn, "uplink SNR", "snr_ul_measurements")
        r_sum = metrics.sum_rate(s_dl, s_ul, inr, inr_cl).r_sum
        if r_sum > r_max:
            best, r_max = (t, r, dt, dr, inr, s_dl, s_ul), r_sum
            if r_max >= params.se_target:
                break

    if best is None:
        # nothing qualified (fallback) or nothing beat a zero rate: keep the init pair
        t, r = init.theta_dl_init, init.theta_ul_init
        inr = inr_cache.get((t, r))
        if inr is None:
            inr = measured(inr_cache, (t, r), inr_fn, "INR", "inr_measurements")
        return _result("steer_plus", t, r, 0.0, 0.0, inr, init.snr_dl_init, init.snr_ul_init,
                       inr_cl, not any_qualified, ledger)
    t, r, dt, dr, inr, s_dl, s_ul = best
    return _result("steer_plus", t, r, dt, dr, inr, s_dl, s_ul, inr_cl, False, ledger)
