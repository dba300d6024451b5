"""Find the direct-coupling gain that puts a scene's median swept INR at a target.

    python scripts/calibrate_coupling.py [scene.yaml] --target-db 8
"""
import argparse
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from fdbeam.channel import default_scene_path, load_scene
from fdbeam.measure import SceneMeasurer
from fdbeam.sweep import make_profile


def median_inr_db(scene, kappa_db, profile):
    g = SceneMeasurer(replace(scene, direct_coupling_gain_db=kappa_db)).inr_grid(profile, profile)
    return float(np.median(10 * np.log10(g)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scene", nargs="?", default=str(default_scene_path()))
    ap.add_argument("--target-db", type=float, default=8.0)
    ap.add_argument("--profile", default="-64:1:64")
    args = ap.parse_args()

    scene = load_scene(args.scene)
    start, step, stop = (float(x) for x in args.profile.split(":"))
    profile = make_profile(start, step, stop)
    kappa = brentq(lambda k: median_inr_db(scene, k, profile) - args.target_db, -60.0, 30.0, xtol=1e-3)
    print(f"direct_coupling_gain_db = {kappa:.2f}  (median INR {median_inr_db(scene, kappa, profile):.2f} dB)")


if __name__ == "__main__":
    main()
