"""Four-user evaluation: every ordered downlink/uplink pair, every neighbourhood size."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import metrics
from .array import make_codebook, to_linear
from .config import ExperimentConfig, parse_range
from .measure import SceneMeasurer
from .selection import SteerParams, SteerPlusParams, initial_selection, steer, steer_plus

REPORT_FIELDS = (
    "dl_user", "ul_user", "delta_deg", "algorithm", "theta_dl_init", "theta_ul_init",
    "theta_tx", "theta_rx", "inr_db", "sinr_dl_db", "sinr_ul_db", "r_dl", "r_ul", "r_sum",
    "codebook_capacity", "normalized_se", "deviation_metric", "fallback_used",
    "inr_measurements", "snr_dl_measurements", "snr_ul_measurements", "cache_hits",
)


@dataclass(frozen=True)
class ScenarioRecord:
    dl_user: int
    ul_user: int
    delta_deg: float
    algorithm: str
    theta_dl_init: float
    theta_ul_init: float
    theta_tx: float
    theta_rx: float
    inr_db: float
    sinr_dl_db: float
    sinr_ul_db: float
    r_dl: float
    r_ul: float
    r_sum: float
    codebook_capacity: float
    normalized_se: float
    deviation_metric: float
    fallback_used: bool
    inr_measurements: int
    snr_dl_measurements: int
    snr_ul_measurements: int
    cache_hits: int


@dataclass
class ScenarioReport:
    scene_name: str
    scene_digest: str
    seed: int
    records: list = field(default_factory=list)

    def select(self, **match) -> list:
        return [r for r in self.records if all(getattr(r, k) == v for k, v in match.items())]


def _record(dl, ul, delta, init, cap, res) -> ScenarioRecord:
    led = res.ledger
    return ScenarioRecord(
        dl, ul, float(delta), res.algorithm, init.theta_dl_init, init.theta_ul_init,
        res.theta_tx_star, res.theta_rx_star, res.inr_db, res.sinr_dl_db, res.sinr_ul_db,
        res.r_dl, res.r_ul, res.r_sum, cap, metrics.normalized_se(res.r_sum, cap),
        res.deviation_metric, res.fallback_used, led.inr_measurements,
        led.snr_dl_measurements, led.snr_ul_measurements, led.cache_hits)


def run_scenario(config: ExperimentConfig, scene=None) -> ScenarioReport:
    """Beam alignment, then STEER and STEER+ for each pair and neighbourhood size."""
    scene = scene if scene is not None else config.load_scene()
    if len(scene.users) < 2:
        raise ValueError("scenario needs at least two users")
    m = SceneMeasurer(scene, bits=config.bits, jitter_db=config.inr_jitter_db)
    cb_angles = parse_range(config.codebook)
    step = cb_angles[1] - cb_angles[0] if len(cb_angles) > 1 else 1.0
    cb_tx = make_codebook(cb_angles[0], cb_angles[-1], step, scene.tx_array, config.bits)
    cb_rx = make_codebook(cb_angles[0], cb_angles[-1], step, scene.rx_array, config.bits)

    report = ScenarioReport(scene.name, scene.digest(), scene.seed)
    fixed_cl = config.crosslink_db()
    for dl, ul in config.user_pairs(len(scene.users)):
        snr_dl, snr_ul = m.snr_dl_fn(dl), m.snr_ul_fn(ul)
        init = initial_selection(cb_tx, cb_rx, snr_dl, snr_ul)
        cap = metrics.codebook_capacity(init)
        inr_cl = m.inr_cl(dl, ul) if fixed_cl is None else to_linear(fixed_cl)
        for delta in config.deltas:
            sp = SteerParams(delta, delta, config.res_deg, config.res_deg, config.steer_inr_target_db)
            res = steer(init, sp, m.inr, snr_dl, snr_ul, inr_cl)
            report.records.append(_record(dl, ul, delta, init, cap, res))
            pp = SteerPlusParams(delta, delta, config.res_deg, config.res_deg,
                                 config.plus_inr_target_db, config.plus_se_target)
            res = steer_plus(init, pp, m.inr, snr_dl, snr_ul, inr_cl)
            report.records.append(_record(dl, ul, delta, init, cap, res))
    return report


# name kept for callers of the original interface
run_scenario_paper = run_scenario


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def write_report_csv(report: ScenarioReport, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        for rec in report.records:
            d = asdict(rec)
            w.writerow([_fmt(d[k]) for k in REPORT_FIELDS])
    return path


def load_report_csv(path) -> list:
    """Records back from ``report.csv`` (used by the plotting path)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for f in REPORT_FIELDS:
                v = row[f]
                if f in ("dl_user", "ul_user", "inr_measurements", "snr_dl_measurements",
                         "snr_ul_measurements", "cache_hits"):
                    kw[f] = int(v)
                elif f == "algorithm":
                    kw[f] = v
                elif f == "fallback_used":
                    kw[f] = v == "true"
                else:
                    kw[f] = float(v)
            out.append(ScenarioRecord(**kw))
    return out


def summarize(report: ScenarioReport) -> dict:
    deltas = sorted({r.delta_deg for r in report.records})
    by_alg = {}
    for alg in ("steer", "steer_plus"):
        rows = {}
        for d in deltas:
            recs = report.select(algorithm=alg, delta_deg=d)
            if recs:
                rows[_fmt(d)] = {
                    "mean_normalized_se": sum(r.normalized_se for r in recs) / len(recs),
                    "min_normalized_se": min(r.normalized_se for r in recs),
                    "mean_inr_db": sum(r.inr_db for r in recs) / len(recs),
                    "total_inr_measurements": sum(r.inr_measurements for r in recs),
                    "total_snr_measurements": sum(r.snr_dl_measurements + r.snr_ul_measurements for r in recs),
                }
        by_alg[alg] = rows
    return {
        "scene": report.scene_name,
        "scene_digest": report.scene_digest,
        "seed": report.seed,
        "records": len(report.records),
        "pairs": len({(r.dl_user, r.ul_user) for r in report.records}),
        "deltas": deltas,
        "by_algorithm": by_alg,
    }


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def export_report(report: ScenarioReport, out_dir) -> dict:
    """Write ``report.csv`` and ``summary.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_report_csv(report, out_dir / "report.csv")
    json_path = out_dir / "summary.json"
    json_path.write_text(json.dumps(_json_safe(summarize(report)), indent=2, sort_keys=True) + "\n")
    return {"csv": csv_path, "json": json_path}
