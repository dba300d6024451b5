"""Run STEER and STEER+ for every user pair and neighbourhood size, per scene.

    python scripts/steer_vs_neighborhood.py [--scenes lobby lab] [--out out/scenario]

Each scene gets a report CSV, a summary JSON and bar charts of the
normalized sum spectral efficiency; a table of means is printed.
"""
import argparse
from pathlib import Path

from fdbeam import plots
from fdbeam.config import ExperimentConfig, parse_range
from fdbeam.scenario import export_report, run_scenario, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenes", nargs="+", default=["lobby", "lab"])
    ap.add_argument("--nbr", default="0:1:6", help="neighbourhood half-widths in degrees [0:1:6]")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", default="out/scenario", help="output directory [out/scenario]")
    args = ap.parse_args()

    deltas = parse_range(args.nbr)
    for name in args.scenes:
        cfg = ExperimentConfig(scene=name, seed=args.seed, deltas=deltas)
        report = run_scenario(cfg)
        out = Path(args.out) / Path(name).stem
        export_report(report, out)
        for alg in ("steer", "steer_plus"):
            plots.render("bars", report.records, out / f"bars_{alg}.png", algorithm=alg)

        s = summarize(report)
        print(f"{report.scene_name}: {s['pairs']} pairs, mean normalized SE")
        print("  delta   STEER  STEER+   INR meas. (STEER / STEER+)")
        for d in s["deltas"]:
            a, b = (s["by_algorithm"][alg][repr(float(d))] for alg in ("steer", "steer_plus"))
            print(f"  {d:5g}  {a['mean_normalized_se']:6.3f}  {b['mean_normalized_se']:6.3f}"
                  f"   {a['total_inr_measurements']:5d} / {b['total_inr_measurements']:5d}")


if __name__ == "__main__":
    main()
