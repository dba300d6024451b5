"""Command-line entry point: ``fdbeam <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 oracle verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import yaml

from . import oracle
from .array import make_codebook, to_db
from .channel import SceneError, swap_roles
from .config import SEED_ENV, ConfigError, ExperimentConfig, parse_config, parse_range, with_overrides
from .measure import SceneMeasurer
from .scenario import export_report, load_report_csv, run_scenario
from .selection import MeasurementError, SteerParams, SteerPlusParams, initial_selection, steer, steer_plus
from .sweep import (
    InrMap, SweepDataError, cdf, cdf_of_stat, export_sweep, import_sweep, parse_profile,
    reciprocity_delta, run_sweep, stats_maps,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_MISMATCH = 0, 2, 3, 4


class VerificationError(RuntimeError):
    pass


def _float_arg(text: str) -> float:
    try:
        return float(text)  # accepts "inf"
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _config(args) -> ExperimentConfig:
    """Config from ``--config`` (if given) with command-line flags on top."""
    if args.config:
        cfg = parse_config(args.config)
        if args.scene_given:
            cfg = with_overrides(cfg, scene=args.scene, base_dir=str(Path.cwd()))
    else:
        cfg = with_overrides(ExperimentConfig(scene=args.scene), base_dir=str(Path.cwd()))
    if not cfg.scene_path().is_file():
        raise ConfigError(f"scene: file not found: {cfg.scene_path()}")
    over = {"seed": args.seed}
    for flag in ("tx_profile", "rx_profile"):
        val = getattr(args, flag, None)
        if val is not None:
            try:
                parse_profile(val)
            except ValueError as e:
                raise ConfigError(f"--{flag.replace('_', '-')}: {e}") from None
            over[flag] = val
    return with_overrides(cfg, **over)


def _emit(obj, output):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text + "\n")
    print(text)


def _finite(x):
    return repr(x) if isinstance(x, float) and not math.isfinite(x) else x


# --- subcommands ----------------------------------------------------------

def cmd_sweep(args) -> int:
    cfg = _config(args)
    scene = cfg.load_scene()
    if args.swap:
        scene = swap_roles(scene)
    m = SceneMeasurer(scene, bits=cfg.bits, jitter_db=cfg.inr_jitter_db)
    tx, rx = parse_profile(cfg.tx_profile), parse_profile(cfg.rx_profile)
    if cfg.inr_jitter_db > 0:
        inr_map = run_sweep(m.inr, tx, rx)
    else:
        inr_map = InrMap(tx, rx, m.inr_grid(tx.angles, rx.angles))
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_sweep(inr_map, out, {"scene": scene.name, "scene_digest": scene.digest(),
                                "seed": scene.seed, "swapped": bool(args.swap)})
    c = cdf(inr_map)
    t, r = inr_map.argmax()
    print(f"{out}: {inr_map.values.size} cells, median INR {c.quantile(0.5):.2f} dB, "
          f"peak at ({t:g}, {r:g})")
    if args.plot:
        from .plots import render
        render("heatmap", inr_map, out.with_suffix(".png"))
    return EXIT_OK


def cmd_analyze(args) -> int:
    inr_map = import_sweep(args.input)
    if args.kind == "cdf":
        c = cdf(inr_map)
        res = {"cells": len(c), "median_db": c.quantile(0.5), "p10_db": c.quantile(0.1),
               "p90_db": c.quantile(0.9), "fraction_below_0db": c.fraction_below(0.0)}
        if args.plot:
            from .plots import render
            render("cdf", {"INR": c}, args.plot)
    elif args.kind == "neighborhood":
        deltas = parse_range(args.nbr if args.nbr is not None else "0:1:3")
        res = {"neighborhoods": []}
        curves = {}
        for d in deltas:
            s = stats_maps(inr_map, d, d)
            cmin, crng = cdf_of_stat(s, "min"), cdf_of_stat(s, "rng")
            res["neighborhoods"].append({
                "delta_deg": d, "median_min_db": cmin.quantile(0.5),
                "fraction_min_below_0db": cmin.fraction_below(0.0),
                "median_rng_db": crng.quantile(0.5), "undefined_rng_cells": int(s.rng_undefined.sum()),
            })
            curves[f"min, delta={d:g}"] = cmin
        if args.plot:
            from .plots import render
            render("cdf", curves, args.plot)
    else:
        if args.other is None:
            raise ConfigError("reciprocity needs --other (the role-swapped sweep)")
        other = import_sweep(args.other)
        try:
            dev = reciprocity_delta(inr_map, other)
        except ValueError as e:
            raise SweepDataError(str(e)) from None
        res = {"max_abs_deviation_db": dev}
    _emit(res, args.output)
    return EXIT_OK


def _selection_setup(args, cfg):
    scene = cfg.load_scene()
    n = len(scene.users)
    for idx, what in ((args.dl_user, "--dl-user"), (args.ul_user, "--ul-user")):
        if not 0 <= idx < n:
            raise ConfigError(f"{what}: scene has users 0..{n - 1}")
    if args.dl_user == args.ul_user:
        raise ConfigError("--dl-user and --ul-user must differ")
    m = SceneMeasurer(scene, bits=cfg.bits, jitter_db=cfg.inr_jitter_db)
    cb = parse_range(cfg.codebook)
    step = cb[1] - cb[0] if len(cb) > 1 else 1.0
    cb_tx = make_codebook(cb[0], cb[-1], step, scene.tx_array, cfg.bits)
    cb_rx = make_codebook(cb[0], cb[-1], step, scene.rx_array, cfg.bits)
    snr_dl, snr_ul = m.snr_dl_fn(args.dl_user), m.snr_ul_fn(args.ul_user)
    init = initial_selection(cb_tx, cb_rx, snr_dl, snr_ul)
    inr_fn = m.inr
    if args.dataset:
        inr_fn = import_sweep(args.dataset).lookup
    inr_cl = m.inr_cl(args.dl_user, args.ul_user)
    return init, inr_fn, snr_dl, snr_ul, inr_cl


def cmd_select(args) -> int:
    cfg = _config(args)
    init, inr_fn, snr_dl, snr_ul, inr_cl = _selection_setup(args, cfg)
    nbr = args.nbr if args.nbr is not None else 3.0
    if args.algorithm == "steer":
        tgt = args.inr_target if args.inr_target is not None else 0.0
        params = SteerParams(nbr, nbr, args.res, args.res, tgt)
        res = steer(init, params, inr_fn, snr_dl, snr_ul, inr_cl)
    else:
        tgt = args.inr_target if args.inr_target is not None else math.inf
        se = args.se_target if args.se_target is not None else math.inf
        params = SteerPlusParams(nbr, nbr, args.res, args.res, tgt, se)
        res = steer_plus(init, params, inr_fn, snr_dl, snr_ul, inr_cl)
    out = {"init": {"theta_dl_init": init.theta_dl_init, "theta_ul_init": init.theta_ul_init,
                    "snr_dl_init_db": to_db(init.snr_dl_init), "snr_ul_init_db": to_db(init.snr_ul_init)},
           "result": res.to_dict(), "inr_cl_db": to_db(inr_cl),
           "params": {k: _finite(v) for k, v in vars(params).items()}}
    if args.verify:
        ref = oracle.oracle_exhaustive(init, params, inr_fn, snr_dl, snr_ul, inr_cl)
        bad = oracle.mismatches(res, ref)
        out["verify"] = {"oracle": ref.to_dict(), "mismatches": [list(b) for b in bad]}
        _emit(out, args.output)
        if bad:
            raise VerificationError("; ".join(f"{k}: {a!r} != oracle {b!r}" for k, a, b in bad))
        return EXIT_OK
    _emit(out, args.output)
    return EXIT_OK


def cmd_scenario(args) -> int:
    cfg = _config(args)
    over = {}
    if args.nbr is not None:
        try:
            over["deltas"] = parse_range(args.nbr)
        except ValueError as e:
            raise ConfigError(f"--nbr: {e}") from None
    if args.res is not None:
        over["res_deg"] = args.res
    if args.inr_target is not None:
        over["steer_inr_target_db"] = args.inr_target
    if args.se_target is not None:
        over["plus_se_target"] = args.se_target
    cfg = with_overrides(cfg, **over)
    out_dir = Path(args.output or cfg.output)
    report = run_scenario(cfg)
    paths = export_report(report, out_dir)
    if cfg.plots and not args.no_plots:
        from .plots import render
        records = load_report_csv(paths["csv"])  # figures read only exported artifacts
        for alg in ("steer", "steer_plus"):
            render("bars", records, out_dir / f"bars_{alg}.png", algorithm=alg)
    print(f"{len(report.records)} records -> {paths['csv']}, {paths['json']}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plots import render
    if args.kind == "bars":
        records = load_report_csv(args.input)
        kw = {"algorithm": args.algorithm}
        if args.nbr is not None:
            kw["deltas"] = parse_range(args.nbr)
        render("bars", records, args.output, **kw)
    else:
        inr_map = import_sweep(args.input)
        if args.kind == "heatmap":
            kw = {}
            if args.vmin is not None:
                kw["vmin"] = args.vmin
            if args.vmax is not None:
                kw["vmax"] = args.vmax
            render("heatmap", inr_map, args.output, **kw)
        else:
            render("cdf", {"INR": cdf(inr_map)}, args.output)
    print(args.output)
    return EXIT_OK


def cmd_import(args) -> int:
    inr_map = import_sweep(args.input)
    c = cdf(inr_map)
    info = {"cells": int(inr_map.values.size), "tx_profile": inr_map.tx_profile.text(),
            "rx_profile": inr_map.rx_profile.text(), "median_db": c.quantile(0.5)}
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        export_sweep(inr_map, out, {"source": str(args.input)})
        info["written"] = str(out)
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_OK


# --- parser ---------------------------------------------------------------

class _SceneAction(argparse.Action):
    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        ns.scene_given = True


def _scene_flags(p, profiles=False):
    p.add_argument("--scene", default="lobby", action=_SceneAction,
                   help="built-in scene (lobby, lab) or a scene YAML path [lobby]")
    p.add_argument("--config", help="experiment config YAML; flags override it")
    p.add_argument("--seed", type=int, help=f"scene seed (else ${SEED_ENV}, else the scene's own seed)")
    if profiles:
        p.add_argument("--tx-profile", metavar="START:STEP:STOP", help="transmit sweep angles")
        p.add_argument("--rx-profile", metavar="START:STEP:STOP", help="receive sweep angles")
    p.set_defaults(scene_given=False)


def _selection_flags(p, nbr_help):
    p.add_argument("--nbr", help=nbr_help)
    p.add_argument("--res", type=_float_arg, help="neighbourhood resolution in degrees")
    p.add_argument("--inr-target", type=_float_arg, help="INR target in dB (accepts inf)")
    p.add_argument("--se-target", type=_float_arg, help="STEER+ sum-rate target in bps/Hz (accepts inf)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdbeam", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="exhaustive INR sweep of a scene to a CSV dataset")
    _scene_flags(p, profiles=True)
    p.add_argument("--output", default="sweep.csv", help="CSV path [sweep.csv]")
    p.add_argument("--swap", action="store_true", help="exchange the transmit and receive arrays")
    p.add_argument("--plot", action="store_true", help="also write a heatmap next to the CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="statistics of a sweep dataset")
    p.add_argument("kind", choices=("cdf", "neighborhood", "reciprocity"))
    p.add_argument("--input", required=True, help="sweep CSV")
    p.add_argument("--other", help="role-swapped sweep CSV (reciprocity)")
    p.add_argument("--nbr", help="neighbourhood half-widths, e.g. 0:1:3 [0:1:3]")
    p.add_argument("--plot", help="write a CDF figure here")
    p.add_argument("--output", help="also write the JSON result here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select", help="run STEER or STEER+ for one user pair")
    p.add_argument("algorithm", choices=("steer", "steer-plus"))
    _scene_flags(p)
    p.add_argument("--dl-user", type=int, default=0)
    p.add_argument("--ul-user", type=int, default=1)
    p.add_argument("--dataset", help="replay INR readings from this sweep CSV instead of the scene")
    p.add_argument("--verify", action="store_true", help="cross-check against the exhaustive oracle")
    p.add_argument("--output", help="also write the JSON result here")
    p.add_argument("--nbr", type=_float_arg, help="neighbourhood half-width in degrees [3]")
    p.add_argument("--res", type=_float_arg, default=1.0, help="neighbourhood resolution in degrees [1]")
    p.add_argument("--inr-target", type=_float_arg, help="INR target in dB (accepts inf)")
    p.add_argument("--se-target", type=_float_arg, help="STEER+ sum-rate target in bps/Hz (accepts inf)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("scenario", help="four-user evaluation over all pairs and neighbourhood sizes")
    _scene_flags(p)
    _selection_flags(p, "neighbourhood half-widths, e.g. 0:1:6")
    p.add_argument("--output", help="output directory [config output]")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("plot", help="render a figure from an exported dataset or report")
    p.add_argument("kind", choices=("heatmap", "cdf", "bars"))
    p.add_argument("--input", required=True, help="sweep CSV (heatmap, cdf) or report CSV (bars)")
    p.add_argument("--output", required=True, help="image path (.png, .pdf, .svg)")
    p.add_argument("--algorithm", default="steer_plus", choices=("steer", "steer_plus"))
    p.add_argument("--nbr", help="neighbourhood sizes to draw (bars)")
    p.add_argument("--vmin", type=_float_arg, help="colour scale minimum in dB")
    p.add_argument("--vmax", type=_float_arg, help="colour scale maximum in dB")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("import", help="validate an external sweep CSV and optionally re-export it")
    p.add_argument("input")
    p.add_argument("--output", help="normalised CSV (with sidecar) to write")
    p.set_defaults(func=cmd_import)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SceneError, yaml.YAMLError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SweepDataError, MeasurementError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except VerificationError as e:
        print(f"verification mismatch: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except FileNotFoundError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
