"""Brute-force reference solutions for the beam-refinement problems.

Every pair in the neighbourhood grid is measured and the optimisation
problems are applied literally, without candidate ordering or early exit.
Used by the test-suite and by ``fdbeam select --verify``.
"""
from __future__ import annotations

import math

import numpy as np

from .array import to_db
from .selection import MeasurementLedger, SelectionResult, SteerParams, SteerPlusParams


def _grid(center: float, delta: float, res: float):
    k = 0
    while (k + 1) * res <= delta + 1e-9:
        k += 1
    return [(center + m * res, m * res) for m in range(-k, k + 1)]


def _rates(snr_dl, snr_ul, inr, inr_cl):
    r_dl = math.log2(1 + snr_dl / (1 + inr_cl))
    r_ul = math.log2(1 + snr_ul / (1 + inr))
    return r_dl, r_ul


def oracle_exhaustive(init, params, inr_fn, snr_dl_fn=None, snr_ul_fn=None, inr_cl: float = 0.0,
                      algorithm: str | None = None) -> SelectionResult:
    """Exhaustive solution of the STEER or STEER+ problem.

    ``algorithm`` defaults to ``"steer_plus"`` for :class:`SteerPlusParams`
    and ``"steer"`` otherwise. Among equally good pairs the one with the
    smallest ``(deviation, |d_tx|, d_tx, d_rx)`` wins.
    """
    if algorithm is None:
        algorithm = "steer_plus" if isinstance(params, SteerPlusParams) else "steer"
    cells = []
    for t, dt in _grid(init.theta_dl_init, params.delta_tx_deg, params.res_tx_deg):
        for r, dr in _grid(init.theta_ul_init, params.delta_rx_deg, params.res_rx_deg):
            cells.append({"t": t, "r": r, "dt": dt, "dr": dr, "dev": dt ** 2 + dr ** 2,
                          "inr": inr_fn(t, r)})
    ledger = MeasurementLedger(inr_measurements=len(cells))
    tie = lambda c: (c["dev"], abs(c["dt"]), c["dt"], c["dr"])  # noqa: E731
    inr_tgt = 10 ** (params.inr_target_db / 10)
    have_snr = snr_dl_fn is not None and snr_ul_fn is not None

    if have_snr:
        for c in cells:
            c["snr_dl"], c["snr_ul"] = snr_dl_fn(c["t"]), snr_ul_fn(c["r"])
            c["r_dl"], c["r_ul"] = _rates(c["snr_dl"], c["snr_ul"], c["inr"], inr_cl)
            c["r_sum"] = c["r_dl"] + c["r_ul"]
        ledger.snr_dl_measurements = len({c["t"] for c in cells})
        ledger.snr_ul_measurements = len({c["r"] for c in cells})

    fallback = False
    if algorithm == "steer":
        bound = max(inr_tgt, min(c["inr"] for c in cells))
        chosen = min((c for c in cells if c["inr"] <= bound), key=tie)
    elif algorithm == "steer_plus":
        if not have_snr:
            raise ValueError("steer_plus oracle needs SNR functions")
        feasible = [c for c in cells if c["inr"] <= inr_tgt]
        r_best = max((c["r_sum"] for c in feasible), default=0.0)
        if not feasible or r_best <= 0:
            # infeasible: the initial directions are kept
            fallback = not feasible
            chosen = next(c for c in cells if c["dt"] == 0 and c["dr"] == 0)
            chosen = dict(chosen, snr_dl=init.snr_dl_init, snr_ul=init.snr_ul_init)
        else:
            floor = min(params.se_target, r_best)
            chosen = min((c for c in feasible if c["r_sum"] >= floor), key=tie)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    if have_snr:
        r_dl, r_ul = _rates(chosen["snr_dl"], chosen["snr_ul"], chosen["inr"], inr_cl)
        sinr_dl = float(to_db(chosen["snr_dl"] / (1 + inr_cl)))
        sinr_ul = float(to_db(chosen["snr_ul"] / (1 + chosen["inr"])))
        r_sum = r_dl + r_ul
    else:
        r_dl = r_ul = r_sum = sinr_dl = sinr_ul = None
    return SelectionResult(algorithm, chosen["t"], chosen["r"], float(to_db(chosen["inr"])), sinr_dl, sinr_ul,
                           r_dl, r_ul, r_sum, chosen["dev"], fallback, ledger)


def grid_max_sum_rate(init, params: SteerParams, inr_fn, snr_dl_fn, snr_ul_fn, inr_cl: float,
                      inr_target_db: float = math.inf) -> float:
    """Largest sum rate over neighbourhood pairs meeting the INR target."""
    best = -np.inf
    for t, _ in _grid(init.theta_dl_init, params.delta_tx_deg, params.res_tx_deg):
        for r, _ in _grid(init.theta_ul_init, params.delta_rx_deg, params.res_rx_deg):
            inr = inr_fn(t, r)
            if inr <= 10 ** (inr_target_db / 10):
                best = max(best, sum(_rates(snr_dl_fn(t), snr_ul_fn(r), inr, inr_cl)))
    return float(best)


def mismatches(result: SelectionResult, reference: SelectionResult) -> list:
    """Fields on which a selection disagrees with the oracle (exact comparison)."""
    keys = ["theta_tx_star", "theta_rx_star", "deviation_metric", "fallback_used"]
    if result.r_sum is not None and reference.r_sum is not None:
        keys.append("r_sum")
    return [(k, getattr(result, k), getattr(reference, k)) for k in keys
            if getattr(result, k) != getattr(reference, k)]
