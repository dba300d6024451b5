"""Link quantities for a full-duplex BS serving one downlink and one uplink user.

All arithmetic is in linear power; dB appears only at the edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array import BeamWeights, to_db, to_linear


@dataclass(frozen=True)
class LinkBudget:
    """Transmit and noise powers in dBm.

    The defaults are calibration choices that put the shipped scene's
    aligned SNRs in the 10-25 dB range; they are not measured hardware values.
    """

    p_bs_dbm: float = 10.0
    p_ue_dbm: float = 10.0
    noise_bs_dbm: float = -70.0
    noise_ue_dbm: float = -70.0

    def __post_init__(self):
        vals = (self.p_bs_dbm, self.p_ue_dbm, self.noise_bs_dbm, self.noise_ue_dbm)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("link budget entries must be finite")
        if not (self.noise_bs_dbm < self.p_bs_dbm and self.noise_ue_dbm < self.p_ue_dbm):
            raise ValueError("noise powers must be below transmit powers")

    # power ratios used by the formulas below
    @property
    def bs_to_bs_noise(self) -> float:
        return to_linear(self.p_bs_dbm - self.noise_bs_dbm)

    @property
    def bs_to_ue_noise(self) -> float:
        return to_linear(self.p_bs_dbm - self.noise_ue_dbm)

    @property
    def ue_to_bs_noise(self) -> float:
        return to_linear(self.p_ue_dbm - self.noise_bs_dbm)

    @property
    def ue_to_ue_noise(self) -> float:
        return to_linear(self.p_ue_dbm - self.noise_ue_dbm)


@dataclass(frozen=True)
class LinkMetrics:
    snr_linear: float
    inr_linear: float

    @property
    def sinr_linear(self) -> float:
        return sinr(self.snr_linear, self.inr_linear)

    @property
    def snr_db(self) -> float:
        return to_db(self.snr_linear)

    @property
    def inr_db(self) -> float:
        return to_db(self.inr_linear)

    @property
    def sinr_db(self) -> float:
        return to_db(self.sinr_linear)


@dataclass(frozen=True)
class RatePair:
    r_dl: float
    r_ul: float

    @property
    def r_sum(self) -> float:
        return self.r_dl + self.r_ul


def _vec(x) -> np.ndarray:
    return np.asarray(x.weights if isinstance(x, BeamWeights) else getattr(x, "vector", x))


def _inner(a: np.ndarray, b: np.ndarray) -> complex:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.vdot(a, b)


def snr_dl(f, h_tx, budget: LinkBudget) -> float:
    """``P_BS |h_tx^H f|^2 / N_UE``."""
    return budget.bs_to_ue_noise * abs(_inner(_vec(h_tx), _vec(f))) ** 2


def snr_ul(w, h_rx, budget: LinkBudget) -> float:
    """``P_UE |w^H h_rx|^2 / N_BS``."""
    return budget.ue_to_bs_noise * abs(_inner(_vec(w), _vec(h_rx))) ** 2


def inr_si(f, w, H, budget: LinkBudget) -> float:
    """Self-interference ``P_BS |w^H H f|^2 / N_BS``."""
    H = np.asarray(getattr(H, "matrix", H))
    fv, wv = _vec(f), _vec(w)
    if H.shape != (wv.size, fv.size):
        raise ValueError(f"channel is {H.shape}, beams need {(wv.size, fv.size)}")
    return budget.bs_to_bs_noise * abs(np.vdot(wv, H @ fv)) ** 2


def inr_cl(h, budget: LinkBudget) -> float:
    """Cross-link ``P_UE |h|^2 / N_UE``."""
    h = complex(getattr(h, "scalar", h))
    return budget.ue_to_ue_noise * abs(h) ** 2


def sinr(snr_linear: float, inr_linear: float) -> float:
    return snr_linear / (1.0 + inr_linear)


def rate(sinr_linear: float) -> float:
    return math.log2(1.0 + sinr_linear)


def sum_rate(snr_dl_lin: float, snr_ul_lin: float, inr_si_lin: float, inr_cl_lin: float) -> RatePair:
    return RatePair(rate(sinr(snr_dl_lin, inr_cl_lin)), rate(sinr(snr_ul_lin, inr_si_lin)))


def codebook_capacity(init) -> float:
    """Interference-free sum rate of the beam-alignment selections.

    ``init`` is anything carrying ``snr_dl_init`` and ``snr_ul_init``
    (linear), e.g. :class:`fdbeam.selection.InitialSelection`.
    """
    return rate(init.snr_dl_init) + rate(init.snr_ul_init)


def normalized_se(r_sum: float, capacity: float) -> float:
    if capacity <= 0:
        return 0.0
    return r_sum / capacity


def tdd_sum_rate(snr_dl_lin: float, snr_ul_lin: float, dl_fraction: float = 0.5) -> float:
    """Half-duplex baseline: each direction interference-free for its time share."""
    return dl_fraction * rate(snr_dl_lin) + (1.0 - dl_fraction) * rate(snr_ul_lin)
