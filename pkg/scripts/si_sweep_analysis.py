"""Sweep a scene, then report INR CDFs, neighbourhood statistics and reciprocity.

    python scripts/si_sweep_analysis.py [--scene lobby] [--out out/sweep]

Writes the raw and role-swapped sweeps, an INR heatmap, CDFs of the map and
of the neighbourhood minimum and range, and a JSON summary.
"""
import argparse
import json
from pathlib import Path

from fdbeam import plots
from fdbeam.channel import swap_roles
from fdbeam.config import ExperimentConfig, parse_range
from fdbeam.measure import SceneMeasurer
from fdbeam.sweep import InrMap, cdf, cdf_of_stat, export_sweep, parse_profile, reciprocity_delta, stats_maps


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scene", default="lobby", help="built-in name or scene YAML [lobby]")
    ap.add_argument("--profile", default="-64:1:64", help="tx and rx steering profile [-64:1:64]")
    ap.add_argument("--nbr", default="0:1:3", help="neighbourhood half-widths in degrees [0:1:3]")
    ap.add_argument("--out", default="out/sweep", help="output directory [out/sweep]")
    args = ap.parse_args()

    scene = ExperimentConfig(scene=args.scene).load_scene()
    prof = parse_profile(args.profile)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    m = InrMap(prof, prof, SceneMeasurer(scene).inr_grid(prof, prof))
    swapped = InrMap(prof, prof, SceneMeasurer(swap_roles(scene)).inr_grid(prof, prof))
    export_sweep(m, out / "sweep.csv", {"scene": scene.name})
    export_sweep(swapped, out / "sweep_swapped.csv", {"scene": scene.name, "swapped": True})
    plots.render("heatmap", m, out / "heatmap.png")

    c = cdf(m)
    mins, rngs, rows = {"full map": c}, {}, []
    for d in parse_range(args.nbr):
        s = stats_maps(m, d, d)
        cmin, crng = cdf_of_stat(s, "min"), cdf_of_stat(s, "rng")
        mins[f"min, Δ={d:g}°"] = cmin
        rngs[f"range, Δ={d:g}°"] = crng
        rows.append({"delta_deg": d, "fraction_min_below_0db": cmin.fraction_below(0.0),
                     "median_min_db": cmin.quantile(0.5), "median_rng_db": crng.quantile(0.5)})
    plots.render("cdf", mins, out / "cdf_min.png")
    plots.render("cdf", rngs, out / "cdf_rng.png")

    summary = {
        "scene": scene.name,
        "cells": int(m.values.size),
        "median_inr_db": c.quantile(0.5),
        "fraction_above_0db": c.fraction_above(0.0),
        "peak": list(m.argmax()),
        "reciprocity_max_abs_db": reciprocity_delta(m, swapped),
        "neighborhoods": rows,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{scene.name}: median INR {summary['median_inr_db']:.2f} dB, "
          f"{100 * summary['fraction_above_0db']:.1f}% of pairs above noise")
    for r in rows:
        print(f"  Δ={r['delta_deg']:g}°: {100 * r['fraction_min_below_0db']:.1f}% of pairs have a "
              f"neighbour below noise, median range {r['median_rng_db']:.1f} dB")
    print(f"  reciprocity: max |ΔINR| {summary['reciprocity_max_abs_db']:.2e} dB")


if __name__ == "__main__":
    main()
