import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from fdbeam import metrics, oracle
from fdbeam.array import ArrayGeometry, Codebook, make_codebook, to_db
from fdbeam.channel import Scene, UserNode
from fdbeam.measure import SceneMeasurer
from fdbeam.selection import (
    InitialSelection, MeasurementError, SteerParams, SteerPlusParams, beam_align, deviation_key,
    initial_selection, neighborhood_offsets, sorted_candidates, steer, steer_plus,
)

INIT = InitialSelection(-20.0, 12.0, 200.0, 80.0)


def _grid_fns(seed, inr_span=(-15, 25), snr_span=(5, 30)):
    """Random measurement functions backed by lookup tables."""
    rng = np.random.default_rng(seed)
    inr, dl, ul = {}, {}, {}

    def inr_fn(t, r):
        if (t, r) not in inr:
            inr[(t, r)] = 10 ** (rng.uniform(*inr_span) / 10)
        return inr[(t, r)]

    def dl_fn(t):
        if t not in dl:
            dl[t] = 10 ** (rng.uniform(*snr_span) / 10)
        return dl[t]

    def ul_fn(r):
        if r not in ul:
            ul[r] = 10 ** (rng.uniform(*snr_span) / 10)
        return ul[r]

    # populate in a fixed order so results do not depend on query order
    for d_t in np.arange(-6, 7):
        dl_fn(INIT.theta_dl_init + d_t)
        ul_fn(INIT.theta_ul_init + d_t)
        for d_r in np.arange(-6, 7):
            inr_fn(INIT.theta_dl_init + d_t, INIT.theta_ul_init + d_r)
    return inr_fn, dl_fn, ul_fn


# beam alignment

def test_beam_align_single_entry_and_ties():
    cb = make_codebook(0, 0, 5, ArrayGeometry())
    assert beam_align(cb, lambda t: 1.0) == 0.0
    cb = make_codebook(-60, 60, 8, ArrayGeometry())
    assert beam_align(cb, lambda t: 3.0) == -60.0


def test_beam_align_user_at_fifty():
    scene = Scene(users=(UserNode(50.0, 4.0),))
    m = SceneMeasurer(scene)
    cb = make_codebook(-60, 60, 8, scene.tx_array)
    best = beam_align(cb, m.snr_dl_fn(0))
    assert best in (44.0, 52.0)
    snrs = {a: m.snr_dl(0, a) for a in cb.angles}
    assert best == max(snrs, key=snrs.get)


def test_initial_selection_records_snrs():
    cb = make_codebook(-60, 60, 8, ArrayGeometry())
    init = initial_selection(cb, cb, lambda t: -abs(t - 20) + 100, lambda r: -abs(r + 30) + 100)
    assert (init.theta_dl_init, init.theta_ul_init) == (20.0, -28.0)
    assert init.snr_dl_init == 100 and init.snr_ul_init == 98


# candidate ordering

def test_neighborhood_offsets():
    assert neighborhood_offsets(3, 1) == [-3, -2, -1, 0, 1, 2, 3]
    assert neighborhood_offsets(2.5, 1) == [-2, -1, 0, 1, 2]
    assert neighborhood_offsets(0, 1) == [0]
    assert neighborhood_offsets(1, 0.5) == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_sorted_candidates_three_by_three():
    c = sorted_candidates([-1, 0, 1], [-1, 0, 1])
    assert c[0] == (0, 0)
    assert [deviation_key(*p)[0] for p in c] == [0, 1, 1, 1, 1, 2, 2, 2, 2]
    assert c[1:5] == [(0, -1), (0, 1), (-1, 0), (1, 0)]
    assert len(sorted_candidates([-2, -1, 0, 1, 2], [0, 1])) == 10


def test_params_validation():
    with pytest.raises(ValueError):
        SteerParams(delta_tx_deg=-1)
    with pytest.raises(ValueError):
        SteerParams(res_rx_deg=0)
    with pytest.raises(ValueError):
        SteerPlusParams(se_target=-1)


# STEER

def test_steer_zero_neighbourhood_returns_init():
    inr, dl, ul = _grid_fns(0)
    res = steer(INIT, SteerParams(0, 0), inr)
    assert (res.theta_tx_star, res.theta_rx_star) == (INIT.theta_dl_init, INIT.theta_ul_init)
    assert res.ledger.inr_measurements == 1 and res.deviation_metric == 0
    assert res.r_sum is None


def test_steer_minus_infinity_target_takes_global_minimum():
    inr, _, _ = _grid_fns(1)
    res = steer(INIT, SteerParams(3, 3, 1, 1, -math.inf), inr)
    grid = {(INIT.theta_dl_init + a, INIT.theta_ul_init + b): inr(INIT.theta_dl_init + a, INIT.theta_ul_init + b)
            for a in range(-3, 4) for b in range(-3, 4)}
    assert inr(res.theta_tx_star, res.theta_rx_star) == min(grid.values())
    assert res.ledger.inr_measurements == 49


def test_steer_random_grids_match_oracle():
    for seed in range(100):
        inr, dl, ul = _grid_fns(seed)
        p = SteerParams(3, 3, 1, 1, float(np.random.default_rng(seed).uniform(-10, 10)))
        got = steer(INIT, p, inr, dl, ul, 0.5)
        ref = oracle.oracle_exhaustive(INIT, p, inr, dl, ul, 0.5)
        assert oracle.mismatches(got, ref) == []
        assert got.inr_db == ref.inr_db


def test_steer_with_snrs_counts_one_each():
    inr, dl, ul = _grid_fns(3)
    res = steer(INIT, SteerParams(2, 2), inr, dl, ul, 1.0)
    assert res.ledger.snr_dl_measurements == 1 and res.ledger.snr_ul_measurements == 1
    expected = metrics.sum_rate(dl(res.theta_tx_star), ul(res.theta_rx_star),
                                inr(res.theta_tx_star, res.theta_rx_star), 1.0)
    assert res.r_sum == expected.r_sum


def test_steer_prefers_init_when_it_qualifies():
    res = steer(INIT, SteerParams(3, 3, 1, 1, 10.0), lambda t, r: 5.0)
    assert res.deviation_metric == 0


# STEER+

def test_steer_plus_zero_neighbourhood():
    inr, dl, ul = _grid_fns(4)
    res = steer_plus(INIT, SteerPlusParams(0, 0), inr, dl, ul, 0.0)
    assert (res.theta_tx_star, res.theta_rx_star) == (INIT.theta_dl_init, INIT.theta_ul_init)
    assert res.ledger.inr_measurements == 1
    assert res.ledger.snr_dl_measurements <= 1 and res.ledger.snr_ul_measurements <= 1


def test_steer_plus_full_cache_reuse_counts():
    inr, dl, ul = _grid_fns(5)
    res = steer_plus(INIT, SteerPlusParams(3, 3, 1, 1), inr, dl, ul, 0.0)
    led = res.ledger
    assert (led.inr_measurements, led.snr_dl_measurements, led.snr_ul_measurements) == (49, 7, 7)
    assert led.cache_hits == 2 * 49 - 14


def test_steer_plus_infinite_targets_reach_grid_maximum():
    for seed in range(200):
        inr, dl, ul = _grid_fns(seed)
        p = SteerPlusParams(3, 2, 1, 1)
        got = steer_plus(INIT, p, inr, dl, ul, 0.3)
        assert got.r_sum == oracle.grid_max_sum_rate(INIT, p, inr, dl, ul, 0.3)
        assert oracle.mismatches(got, oracle.oracle_exhaustive(INIT, p, inr, dl, ul, 0.3)) == []


def test_steer_plus_finite_targets_match_oracle():
    for seed in range(200):
        inr, dl, ul = _grid_fns(seed)
        rng = np.random.default_rng([seed, 2])
        p = SteerPlusParams(3, 3, 1, 1, float(rng.uniform(-10, 20)), float(rng.uniform(4, 14)))
        got = steer_plus(INIT, p, inr, dl, ul, 0.3)
        assert oracle.mismatches(got, oracle.oracle_exhaustive(INIT, p, inr, dl, ul, 0.3)) == []


def test_steer_plus_early_exit_saves_measurements():
    inr, dl, ul = _grid_fns(6)
    p = SteerPlusParams(3, 3, 1, 1, math.inf, 0.1)
    res = steer_plus(INIT, p, inr, dl, ul, 0.0)
    assert res.deviation_metric == 0
    assert res.ledger.inr_measurements == 1


def test_fallback_when_nothing_meets_target():
    inr, dl, ul = _grid_fns(7, inr_span=(10, 20))
    p = SteerPlusParams(2, 2, 1, 1, 0.0)
    got = steer_plus(INIT, p, inr, dl, ul, 0.0)
    ref = oracle.oracle_exhaustive(INIT, p, inr, dl, ul, 0.0)
    assert got.fallback_used and ref.fallback_used
    assert (got.theta_tx_star, got.theta_rx_star) == (INIT.theta_dl_init, INIT.theta_ul_init)
    assert got.ledger.snr_dl_measurements == 0


def test_zero_rate_grid_keeps_init_without_fallback():
    p = SteerPlusParams(1, 1)
    got = steer_plus(INIT, p, lambda t, r: 1.0, lambda t: 0.0, lambda r: 0.0, 0.0)
    ref = oracle.oracle_exhaustive(INIT, p, lambda t, r: 1.0, lambda t: 0.0, lambda r: 0.0, 0.0)
    assert not got.fallback_used and not ref.fallback_used
    assert got.deviation_metric == ref.deviation_metric == 0


def test_bad_measurements_raise():
    with pytest.raises(MeasurementError):
        steer(INIT, SteerParams(1, 1), lambda t, r: float("nan"))
    with pytest.raises(MeasurementError):
        steer_plus(INIT, SteerPlusParams(1, 1), lambda t, r: 1.0, lambda t: -1.0, lambda r: 1.0, 0.0)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 4), st.integers(0, 4), st.sampled_from([0.5, 1.0, 2.0]),
       st.floats(-10, 30), st.floats(0, 15))
def test_result_invariants(seed, d_tx, d_rx, res, tgt, se):
    inr, dl, ul = _grid_fns(seed)
    for r in (steer(INIT, SteerParams(d_tx, d_rx, res, res, tgt), inr, dl, ul, 0.2),
              steer_plus(INIT, SteerPlusParams(d_tx, d_rx, res, res, tgt, se), inr, dl, ul, 0.2)):
        dt, dr = r.theta_tx_star - INIT.theta_dl_init, r.theta_rx_star - INIT.theta_ul_init
        assert abs(dt) <= d_tx + 1e-9 and abs(dr) <= d_rx + 1e-9
        assert r.deviation_metric == approx(dt * dt + dr * dr)
        led = r.ledger
        assert led.snr_dl_measurements <= 2 * d_tx / res + 1
        assert led.snr_ul_measurements <= 2 * d_rx / res + 1
        assert r.inr_db == approx(to_db(inr(r.theta_tx_star, r.theta_rx_star)))


def test_result_json_handles_infinity():
    inr, dl, ul = _grid_fns(8)
    res = steer_plus(INIT, SteerPlusParams(1, 1), inr, dl, ul, 0.0)
    d = json.loads(res.to_json())
    assert d["algorithm"] == "steer_plus"
    assert d["ledger"]["inr_measurements"] == 9


def test_codebook_type_roundtrip():
    cb = Codebook((0.0,), (None,))
    assert list(cb) == [(0.0, None)]
