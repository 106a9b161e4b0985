"""Command-line front end: design, analyze, simulate and experiment subcommands."""

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from .classes import (
    DB_REGEX,
    DESK_PRESET,
    EXIT_CODES,
    LOG_LEVEL_ENV,
    FULL_PRESET,
    SPEED_OF_LIGHT,
    WAVEFORM_KINDS,
    CazacParams,
    ComplexSequence,
    InfeasibleDesignError,
    SensingRequirements,
    ToolkitError,
    ZcParams,
    amplitude_db,
)
from .config import default_output_dir, load_config, load_scenario, preset_config
from .correlation import apply_doppler_delay, circular_xcorr, sample_fx, closed_form_pslr
from .design import cazac_search, max_normalized_doppler, roi_lag_bound, verify_root, zc_best_root, zc_feasible_range
from .experiments import run_experiment
from .radar import Waveform, doppler_of_bin, simulate_rdm
from .sequences import generate_cazac, generate_zc
from .utils import log
from .utils.codecs import (
    write_profile_csv,
    write_rdm_binary,
    write_rdm_summary_csv,
    write_rows,
    write_sequence_binary,
    write_sequence_csv,
)

EXPERIMENT_COMMANDS = {
    "feasible-region": "feasible_region",
    "cazac-pslr": "cazac_pslr",
    "pslr-doppler": "pslr_vs_doppler",
    "roc": "roc",
    "cazac-roc": "cazac_roc",
    "fx-curve": "fx_curve",
}


def parse_db(text: str) -> float:
    """Parse "20", "20dB" or "-5 dB" into a float."""
    match = DB_REGEX.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"not a dB value: {text!r}")
    return float(match.group("value"))


def _add_requirements(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("sensing requirements")
    group.add_argument("--fc-hz", type=float, default=FULL_PRESET["f_c"], help="carrier frequency in Hz")
    group.add_argument("--ts-s", type=float, default=None, help="sampling period in s (default: preset)")
    group.add_argument("--dr-m", type=float, default=FULL_PRESET["D_r"], help="sensing range in m")
    group.add_argument("--umax-mps", type=float, default=FULL_PRESET["u_max"], help="speed limit in m/s")
    group.add_argument("--pr-db", type=parse_db, default=FULL_PRESET["P_r_db"], help="required PSLR (amplitude dB)")
    group.add_argument("--c", type=float, default=SPEED_OF_LIGHT, help="propagation speed in m/s")
    group.add_argument("--scale", choices=["full", "desk"], default="full", help="preset used for defaults")


def _requirements(args: argparse.Namespace, n_full: int, n_desk: int) -> SensingRequirements:
    T_s = args.ts_s
    if T_s is None:
        T_s = FULL_PRESET["T_s"] * (n_full / n_desk if args.scale == "desk" else 1.0)
    return SensingRequirements.from_db(args.fc_hz, T_s, args.dr_m, args.umax_mps, args.pr_db, c=args.c)


def _zc_length(args: argparse.Namespace) -> int:
    if args.n is not None:
        return args.n
    return DESK_PRESET["N"] if args.scale == "desk" else FULL_PRESET["N"]


def _emit(report: Dict[str, Any], out: Optional[str]):
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if out:
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        log.done(f"Report written to {out}")
    print(text)


def _export(seq: ComplexSequence, path: Optional[str]) -> Optional[str]:
    """Write the designed sequence: binary block for a .bin suffix, CSV otherwise."""
    if not path:
        return None
    if path.endswith(".bin"):
        return write_sequence_binary(seq, path)
    return write_sequence_csv(seq, path)


def cmd_design_zc(args: argparse.Namespace) -> int:
    N = _zc_length(args)
    req = _requirements(args, FULL_PRESET["N"], DESK_PRESET["N"])
    log.info(f"Designing ZC root for N={N}", start_sub=True)
    design = zc_best_root(N, req)
    feasible = zc_feasible_range(N, req)
    report = design.to_dict()
    report.update(
        {
            "N": N,
            "v_bar": max_normalized_doppler(req),
            "feasible_range": {
                "count": len(feasible),
                "min": feasible.roots[0] if feasible.feasible else None,
                "max": feasible.roots[-1] if feasible.feasible else None,
                "lower_bound": feasible.lower_bound,
                "diagnostics": feasible.diagnostics,
            },
        }
    )
    if not design.feasible:
        log.failed("No feasible root index", end_sub=True)
        _emit(report, args.out)
        raise InfeasibleDesignError("No feasible root index", "design zc", details=design.diagnostics)
    log.success(f"p={design.parameter}, PSLR {design.achieved_pslr_db:.2f} dB", end_sub=True)
    exported = _export(generate_zc(ZcParams(N, design.parameter)), args.export)  # type: ignore[arg-type]
    if exported:
        report["sequence"] = exported
    _emit(report, args.out)
    return EXIT_CODES["success"]


def cmd_design_cazac(args: argparse.Namespace) -> int:
    r = args.r if args.r is not None else (DESK_PRESET["r"] if args.scale == "desk" else FULL_PRESET["r"])
    m = args.m if args.m is not None else FULL_PRESET["m"]
    n_full = FULL_PRESET["r"] * FULL_PRESET["m"] ** 2
    req = _requirements(args, n_full, DESK_PRESET["r"] * DESK_PRESET["m"] ** 2)
    task = log.start(f"(phi, a) search r={r} m={m}")
    design = cazac_search(r, m, req, workers=args.workers)
    log.finish(task, f"{design.evaluations} candidates")
    report = design.to_dict()
    report.update({"r": r, "m": m, "N": r * m * m})
    if args.grid_csv:
        phis, slopes = design.grid_axes  # type: ignore[misc]
        rows = [
            {"phi": phi, "a": a, "pslr_db": amplitude_db(float(design.grid[i, j]))}  # type: ignore[index]
            for i, phi in enumerate(phis)
            for j, a in enumerate(slopes)
        ]
        write_rows(args.grid_csv, ["phi", "a", "pslr_db"], rows)
        report["grid_csv"] = args.grid_csv
    if design.feasible and args.export:
        phi, a = design.parameter  # type: ignore[misc]
        report["sequence"] = _export(generate_cazac(CazacParams(r=r, m=m, phi=phi, a=a)), args.export)
    _emit(report, args.out)
    return EXIT_CODES["success"]


def cmd_analyze_pslr(args: argparse.Namespace) -> int:
    N = _zc_length(args)
    req = _requirements(args, FULL_PRESET["N"], DESK_PRESET["N"])
    passed, measurement = verify_root(N, args.p, req)
    v_bar = max_normalized_doppler(req)
    report: Dict[str, Any] = {
        "N": N,
        "p": args.p,
        "v_bar": v_bar,
        "roi_bound": roi_lag_bound(req),
        "measured_pslr_db": measurement.db,
        "saturated": measurement.saturated,
        "sidelobe_lag": measurement.sidelobe_index,
        "meets_threshold": passed,
        "threshold_db": req.P_r_db,
    }
    if 0 < v_bar * N < 1:
        report["closed_form_pslr_db"] = amplitude_db(closed_form_pslr(N, args.p, v_bar))
    if args.profile_csv:
        seq = generate_zc(ZcParams(N, args.p))
        write_profile_csv(circular_xcorr(apply_doppler_delay(seq, 0, v_bar), seq), args.profile_csv)
        report["profile_csv"] = args.profile_csv
    _emit(report, args.out)
    return EXIT_CODES["success"]


def cmd_analyze_fx(args: argparse.Namespace) -> int:
    N = _zc_length(args)
    x = np.round(np.arange(args.x_min, args.x_max + args.step / 2, args.step), 10)
    fx = sample_fx(N, x)
    rows = [{"x": float(a), "fx": float(b)} for a, b in zip(x, fx)]
    out = args.out or os.path.join(default_output_dir(), "fx.csv")
    write_rows(out, ["x", "fx"], rows)
    log.success(f"Sampled f(x) at {len(rows)} points -> {out}")
    return EXIT_CODES["success"]


def _waveform(args: argparse.Namespace, N: int) -> Waveform:
    if args.waveform == "cazac":
        params = CazacParams(r=args.r, m=args.m, phi=args.phi, a=args.a)
        if params.N != N:
            raise InfeasibleDesignError(f"CAZAC length {params.N} != scenario N={N}", "simulate rdm")
        return Waveform.cazac(params)
    base = ZcParams(N, args.p)
    return Waveform.dzc(base) if args.waveform == "dzc" else Waveform.zc(base)


def cmd_simulate_rdm(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario).to_scenario()
    waveform = _waveform(args, scenario.N)
    task = log.start(f"RDM N={scenario.N} K={scenario.K} K0={scenario.K0} targets={len(scenario.targets)}")
    rdm = simulate_rdm(scenario, waveform)
    log.finish(task)
    out = args.output_dir or os.path.join(default_output_dir(), "rdm")
    binary = write_rdm_binary(rdm, os.path.join(out, "rdm.bin"))
    summary = write_rdm_summary_csv(rdm, os.path.join(out, "rdm_summary.csv"))
    n, q = rdm.argmax()
    v = float(doppler_of_bin(q, rdm.N, rdm.K0))
    phys = scenario.physical
    report = {
        "argmax": {"lag": n, "bin": q},
        "distance_m": n * phys.c * phys.T_s / 2.0,
        "velocity_mps": v * phys.c / (2.0 * phys.f_c * phys.T_s),
        "rdm": binary,
        "summary": summary,
    }
    _emit(report, None)
    return EXIT_CODES["success"]


def cmd_experiment(args: argparse.Namespace) -> int:
    experiment = EXPERIMENT_COMMANDS[args.experiment]
    overrides = {
        "trials": args.trials,
        "output_dir": args.output_dir,
        "workers": args.workers,
        "plot": True if args.plot else None,
    }
    if args.config:
        config = load_config(args.config, experiment=experiment, seed=args.seed, **overrides)
    else:
        config = preset_config(experiment, args.seed, args.scale, **overrides)
    result = run_experiment(config)
    _emit({"experiment": result.experiment, "files": result.files, "manifest": result.manifest_path, "summary": result.summary}, None)
    return EXIT_CODES["success"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doppler-cazac",
        description="Doppler-resilient CAZAC waveform design and radar simulation",
    )
    parser.add_argument("--log-level", default=os.environ.get(LOG_LEVEL_ENV, "info"), help="console log level")
    parser.add_argument("--log-file", default=None, help="also log to this rotating file")
    parser.add_argument("--no-color", action="store_true", help="disable ANSI colors")
    commands = parser.add_subparsers(dest="command", required=True)

    design = commands.add_parser("design", help="root index / (phi, a) design").add_subparsers(dest="target", required=True)
    zc = design.add_parser("zc", help="best ZC root index")
    zc.add_argument("--n", type=int, default=None, help="sequence length (odd)")
    zc.add_argument("--out", default=None, help="write the JSON report here too")
    zc.add_argument("--export", default=None, help="write the designed sequence (.bin or .csv)")
    _add_requirements(zc)
    zc.set_defaults(func=cmd_design_zc)

    cazac = design.add_parser("cazac", help="(phi, a) search for the unified CAZAC family")
    cazac.add_argument("--r", type=int, default=None)
    cazac.add_argument("--m", type=int, default=None)
    cazac.add_argument("--workers", type=int, default=None)
    cazac.add_argument("--grid-csv", default=None, help="write the full P(phi, a) grid")
    cazac.add_argument("--out", default=None)
    cazac.add_argument("--export", default=None, help="write the designed sequence (.bin or .csv)")
    _add_requirements(cazac)
    cazac.set_defaults(func=cmd_design_cazac)

    analyze = commands.add_parser("analyze", help="PSLR and f(x) analysis").add_subparsers(dest="target", required=True)
    pslr = analyze.add_parser("pslr", help="measured and closed-form PSLR of ZC(N, p)")
    pslr.add_argument("--n", type=int, default=None)
    pslr.add_argument("--p", type=int, required=True)
    pslr.add_argument("--profile-csv", default=None, help="export the worst-case range profile")
    pslr.add_argument("--out", default=None)
    _add_requirements(pslr)
    pslr.set_defaults(func=cmd_analyze_pslr)

    fx = analyze.add_parser("fx", help="sample f(x) = |sin(πx)/sin(πx/N)|")
    fx.add_argument("--n", type=int, default=None)
    fx.add_argument("--scale", choices=["full", "desk"], default="full")
    fx.add_argument("--x-min", type=float, default=-5.0)
    fx.add_argument("--x-max", type=float, default=5.0)
    fx.add_argument("--step", type=float, default=0.01)
    fx.add_argument("--out", default=None, help="CSV path")
    fx.set_defaults(func=cmd_analyze_fx)

    simulate = commands.add_parser("simulate", help="scenario simulation").add_subparsers(dest="target", required=True)
    rdm = simulate.add_parser("rdm", help="range-Doppler map snapshot of a scenario file")
    rdm.add_argument("--scenario", required=True, help="scenario JSON file")
    rdm.add_argument("--waveform", choices=WAVEFORM_KINDS, default="zc")
    rdm.add_argument("--p", type=int, default=FULL_PRESET["p"])
    rdm.add_argument("--r", type=int, default=FULL_PRESET["r"])
    rdm.add_argument("--m", type=int, default=FULL_PRESET["m"])
    rdm.add_argument("--phi", type=int, default=FULL_PRESET["cazac_phi"])
    rdm.add_argument("--a", type=int, default=FULL_PRESET["cazac_a"])
    rdm.add_argument("--output-dir", default=None)
    rdm.set_defaults(func=cmd_simulate_rdm)

    experiment = commands.add_parser("experiment", help="run an experiment and write CSV tables")
    experiment.add_argument("experiment", choices=sorted(EXPERIMENT_COMMANDS))
    experiment.add_argument("--seed", type=int, required=True, help="64-bit RNG seed")
    experiment.add_argument("--config", default=None, help="JSON experiment config")
    experiment.add_argument("--scale", choices=["full", "desk"], default="full")
    experiment.add_argument("--trials", type=int, default=None)
    experiment.add_argument("--output-dir", default=None)
    experiment.add_argument("--workers", type=int, default=None)
    experiment.add_argument("--plot", action="store_true", help="also render SVG plots")
    experiment.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        log.set_level(args.log_level)
    except ValueError as e:
        parser.error(str(e))
    if args.no_color:
        log.enable_colors(False)
    if args.log_file:
        log.set_log_file(args.log_file)
    log.set_env(args.command)
    try:
        return args.func(args)
    except ToolkitError as e:
        log.error(e.format_message())
        return e.exit_code
    except Exception as e:
        log.critical(f"{type(e).__name__}: {e}")
        return EXIT_CODES["runtime"]


if __name__ == "__main__":
    sys.exit(main())
