"""Experiment runners: each writes CSV tables plus a JSON manifest."""

import hashlib
import json
import os
from dataclasses import dataclass, field
from time import time
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .classes import (
    CazacParams,
    ConfigError,
    InfeasibleDesignError,
    RocCurve,
    RoI,
    SensingRequirements,
    Target,
    ZcParams,
    amplitude_db,
)
from .config import ExperimentConfig
from .correlation import measure_pslr, sample_fx
from .design import (
    average_parameter_cazac,
    cazac_search,
    max_normalized_doppler,
    roi_lag_bound,
    sample_cazac_pslr,
    zc_best_root,
    zc_feasible_range,
)
from .radar import Waveform, roc_sweep, synthesize_echo
from .utils import log
from .utils.codecs import ROC_CSV_FIELDS, write_roc_csv, write_rows

__all__ = [
    "ExperimentResult",
    "run_experiment",
    "run_feasible_region",
    "run_cazac_pslr",
    "run_pslr_vs_doppler",
    "run_roc",
    "run_cazac_roc",
    "run_fx_curve",
    "write_manifest",
]


@dataclass
class ExperimentResult:
    experiment: str
    output_dir: str
    files: Dict[str, str] = field(default_factory=dict)
    manifest_path: Optional[str] = None
    summary: Dict[str, Any] = field(default_factory=dict)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(config: ExperimentConfig, result: ExperimentResult, wall_time: float) -> str:
    """Manifest with the config echo, seed, version, wall time and CSV digests."""
    from . import __version__

    manifest = {
        "experiment": result.experiment,
        "toolkit_version": __version__,
        "seed": config.seed,
        "wall_time_s": round(wall_time, 3),
        "config": config.echo(),
        "outputs": {
            name: {"path": os.path.basename(path), "sha256": _sha256(path)}
            for name, path in sorted(result.files.items())
            if path.endswith(".csv")
        },
        "summary": result.summary,
    }
    path = os.path.join(result.output_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
    return path


def _output_dir(config: ExperimentConfig) -> str:
    path = os.path.join(config.resolved_output_dir(), config.experiment)
    os.makedirs(path, exist_ok=True)
    return path


def _sweep(config: ExperimentConfig, name: str) -> List[float]:
    values = getattr(config.sweep, name)
    if values is None:
        raise ConfigError(f"Experiment {config.experiment} needs a '{name}' sweep", config.experiment)
    return list(values)


def _designed_root(config: ExperimentConfig) -> int:
    if config.sequence.p is not None:
        return config.sequence.p
    req = config.requirements.to_requirements()
    design = zc_best_root(config.sequence.N, req)
    if not design.feasible:
        raise InfeasibleDesignError(
            f"No root index fits N={config.sequence.N}",
            "zc_best_root",
            details=design.diagnostics,
        )
    return int(design.parameter)  # type: ignore[arg-type]


def _db(value: float) -> float:
    return round(amplitude_db(value), 10)


def run_feasible_region(config: ExperimentConfig) -> ExperimentResult:
    """
    Tabulate the feasible root range over the (P_r, D_r) grid for each speed limit.

    ``p_bound`` is the largest root whose S_p covers the RoI; it has no
    Doppler term and so repeats across speed limits.
    """
    out = _output_dir(config)
    base = config.requirements.to_requirements()
    N = config.sequence.N
    rows = []
    for u_max in _sweep(config, "u_max"):
        for d_r in _sweep(config, "d_r"):
            bound = zc_best_root(N, base.replace(D_r=d_r, u_max=u_max))
            for pr_db in _sweep(config, "pr_db"):
                req = base.replace(D_r=d_r, u_max=u_max, P_r=10 ** (pr_db / 20.0))
                fr = zc_feasible_range(N, req)
                rows.append(
                    {
                        "P_r_db": pr_db,
                        "D_r": d_r,
                        "u_max": u_max,
                        "p_lower": fr.roots[0] if fr.feasible else "",
                        "p_upper": fr.roots[-1] if fr.feasible else "",
                        "p_bound": bound.parameter if bound.feasible else "",
                        "feasible": int(fr.feasible),
                    }
                )
    path = write_rows(
        os.path.join(out, "feasible_region.csv"),
        ["P_r_db", "D_r", "u_max", "p_lower", "p_upper", "p_bound", "feasible"],
        rows,
    )
    feasible = sum(r["feasible"] for r in rows)
    return ExperimentResult(
        config.experiment,
        out,
        {"feasible_region": path},
        summary={"grid_points": len(rows), "feasible_points": feasible},
    )


def run_cazac_pslr(config: ExperimentConfig) -> ExperimentResult:
    """Designed (phi, a) PSLR against the mean PSLR of random full-family parameters."""
    out = _output_dir(config)
    base = config.requirements.to_requirements()
    r, m = config.sequence.r, config.sequence.m
    rows = []
    for i, (u_max, d_r) in enumerate((u, d) for u in _sweep(config, "u_max") for d in _sweep(config, "d_r")):
        req = base.replace(D_r=d_r, u_max=u_max)
        design = cazac_search(r, m, req, workers=config.workers)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, i])))
        _, sampled = sample_cazac_pslr(r, m, req, config.n_random, rng)
        phi, a = design.parameter  # type: ignore[misc]
        rows.append(
            {
                "D_r": d_r,
                "u_max": u_max,
                "phi": phi,
                "a": a,
                "pslr_designed_db": _db(design.achieved_pslr),
                "pslr_average_db": round(float(np.mean(20 * np.log10(sampled))), 10),
                "pslr_restricted_mean_db": round(float(np.mean(20 * np.log10(design.grid))), 10),  # type: ignore[arg-type]
            }
        )
        log.info(f"D_r={d_r} m, u_max={u_max} m/s: (phi, a)=({phi}, {a}), {rows[-1]['pslr_designed_db']:.2f} dB")
    path = write_rows(
        os.path.join(out, "cazac_pslr.csv"),
        ["D_r", "u_max", "phi", "a", "pslr_designed_db", "pslr_average_db", "pslr_restricted_mean_db"],
        rows,
    )
    gaps = [row["pslr_designed_db"] - row["pslr_average_db"] for row in rows]
    return ExperimentResult(config.experiment, out, {"cazac_pslr": path}, summary={"min_gap_db": min(gaps)})


def run_pslr_vs_doppler(config: ExperimentConfig) -> ExperimentResult:
    """
    PSLR over the RoI against target velocity for ZC p=1, the designed ZC
    and DZC, averaged in dB over trials. DZC is measured after decoding.
    """
    out = _output_dir(config)
    req = config.requirements.to_requirements()
    N = config.sequence.N
    p = _designed_root(config)
    waveforms = [
        ("zc_p1_db", Waveform.zc(ZcParams(N, 1))),
        ("zc_designed_db", Waveform.zc(ZcParams(N, p))),
        ("dzc_db", Waveform.dzc(ZcParams(N, p))),
    ]
    roi = RoI(roi_lag_bound(req))
    scenario = config.scenario(N, req).replace(K=1)
    rows = []
    for u in _sweep(config, "velocity"):
        target = Target(d=req.D_r / 2.0, u=u)
        row: Dict[str, Any] = {"u": u, "v": 2.0 * u * req.f_c * req.T_s / req.c}
        for column, waveform in waveforms:
            values = []
            for trial in range(config.trials):
                echo = synthesize_echo(scenario, waveform.transmitted, 0, trial=trial, targets=[target])
                values.append(amplitude_db(measure_pslr(waveform.range_profile(echo), roi).linear))
            row[column] = round(float(np.mean(values)), 10)
        rows.append(row)
    path = write_rows(
        os.path.join(out, "pslr_vs_doppler.csv"),
        ["u", "v", "zc_p1_db", "zc_designed_db", "dzc_db"],
        rows,
    )
    return ExperimentResult(config.experiment, out, {"pslr_vs_doppler": path}, summary={"designed_root": p})


def _snr_tag(snr: float) -> str:
    return f"snr{snr:g}".replace("-", "m").replace(".", "p")


def _roc_curves(
    config: ExperimentConfig, N: int, req: SensingRequirements, waveforms: List[Tuple[str, Waveform]]
) -> List[Tuple[str, float, RocCurve]]:
    """One sweep per (SNR, waveform); names carry an SNR tag when several SNRs run."""
    gammas = _sweep(config, "gamma")
    snrs = config.snr_points()
    base = config.scenario(N, req)
    curves = []
    for snr in snrs:
        scenario = base.replace(snr_db=snr)
        for name, waveform in waveforms:
            label = name if len(snrs) == 1 else f"{name}_{_snr_tag(snr)}"
            task = log.start(f"ROC sweep {label}")
            curves.append((label, snr, roc_sweep(scenario, waveform, gammas, config.trials, workers=config.workers)))
            log.finish(task)
    return curves


def _write_roc_tables(out: str, prefix: str, curves: List[Tuple[str, float, RocCurve]]) -> Dict[str, str]:
    files = {}
    combined = []
    for name, snr, curve in curves:
        files[f"{prefix}_{name}"] = write_roc_csv(curve, os.path.join(out, f"{prefix}_{name}.csv"))
        for g, fa, dr in zip(curve.gammas, curve.false_alarm_rates, curve.detection_rates):
            combined.append(
                {
                    "waveform": name,
                    "snr_db": snr,
                    "gamma": float(g),
                    "false_alarm_rate": float(fa),
                    "detection_rate": float(dr),
                    "trials": curve.trials,
                    "seed": curve.seed,
                }
            )
    files[prefix] = write_rows(os.path.join(out, f"{prefix}.csv"), ["waveform", "snr_db", *ROC_CSV_FIELDS], combined)
    return files


def run_roc(config: ExperimentConfig) -> ExperimentResult:
    """ROC curves of ZC p=1, the designed ZC and DZC on shared target draws, per SNR."""
    out = _output_dir(config)
    req = config.requirements.to_requirements()
    N = config.sequence.N
    p = _designed_root(config)
    curves = _roc_curves(
        config,
        N,
        req,
        [
            ("zc_p1", Waveform.zc(ZcParams(N, 1), "zc_p1")),
            ("zc_designed", Waveform.zc(ZcParams(N, p), "zc_designed")),
            ("dzc", Waveform.dzc(ZcParams(N, p), "dzc")),
        ],
    )
    files = _write_roc_tables(out, "roc", curves)
    return ExperimentResult(
        config.experiment,
        out,
        files,
        summary={
            "designed_root": p,
            "snr_db": config.snr_points(),
            "shared_target_draws": True,
            "false_alarm_normalization": "per tested cell",
            "false_alarm_at_detection_0.9": {name: curve.false_alarm_at(0.9) for name, _, curve in curves},
        },
    )


def run_cazac_roc(config: ExperimentConfig) -> ExperimentResult:
    """ROC of the searched (phi, a) CAZAC against an average-parameter CAZAC, per SNR."""
    out = _output_dir(config)
    req = config.requirements.to_requirements()
    r, m = config.sequence.r, config.sequence.m
    if config.sequence.phi is not None:
        designed = CazacParams(r=r, m=m, phi=config.sequence.phi, a=config.sequence.a or 0)
    else:
        phi, a = cazac_search(r, m, req, workers=config.workers).parameter  # type: ignore[misc]
        designed = CazacParams(r=r, m=m, phi=phi, a=a)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, 0xCA2AC])))
    average, mean_db = average_parameter_cazac(r, m, req, config.n_random, rng)
    curves = _roc_curves(
        config,
        designed.N,
        req,
        [("cazac_designed", Waveform.cazac(designed, "cazac_designed")), ("cazac_average", Waveform.cazac(average, "cazac_average"))],
    )
    files = _write_roc_tables(out, "cazac_roc", curves)
    return ExperimentResult(
        config.experiment,
        out,
        files,
        summary={
            "designed": designed.describe(),
            "average": average.describe(),
            "average_mean_pslr_db": mean_db,
            "snr_db": config.snr_points(),
            "false_alarm_at_detection_0.9": {name: curve.false_alarm_at(0.9) for name, _, curve in curves},
        },
    )


def run_fx_curve(config: ExperimentConfig, x_min: float = -5.0, x_max: float = 5.0, step: float = 0.01) -> ExperimentResult:
    """Sample f(x) = |sin(πx)/sin(πx/N)| with the Doppler offset v̄·N recorded."""
    out = _output_dir(config)
    N = config.sequence.N
    x = np.round(np.arange(x_min, x_max + step / 2, step), 10)
    fx = sample_fx(N, x)
    rows = [{"x": float(a), "fx": float(b), "fx_db": _db(b / N) if b > 0 else ""} for a, b in zip(x, fx)]
    path = write_rows(os.path.join(out, "fx_curve.csv"), ["x", "fx", "fx_db"], rows)
    v_bar = max_normalized_doppler(config.requirements.to_requirements())
    return ExperimentResult(config.experiment, out, {"fx_curve": path}, summary={"v_bar_N": v_bar * N})


RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "feasible_region": run_feasible_region,
    "cazac_pslr": run_cazac_pslr,
    "pslr_vs_doppler": run_pslr_vs_doppler,
    "roc": run_roc,
    "cazac_roc": run_cazac_roc,
    "fx_curve": run_fx_curve,
}

PLOT_STYLES = {
    "feasible_region": {"kind": "scatter", "x": "D_r", "y": ["p_lower", "p_upper"], "xlabel": "D_r (m)", "ylabel": "root index p"},
    "cazac_pslr": {"kind": "line", "x": "D_r", "y": ["pslr_designed_db", "pslr_average_db"], "xlabel": "D_r (m)", "ylabel": "PSLR (dB)"},
    "pslr_vs_doppler": {"kind": "line", "x": "u", "y": ["zc_p1_db", "zc_designed_db", "dzc_db"], "xlabel": "velocity (m/s)", "ylabel": "PSLR (dB)"},
    "roc": {"kind": "roc", "x": "false_alarm_rate", "y": ["detection_rate"], "group": "waveform", "xlabel": "false alarm rate", "ylabel": "detection rate", "logx": True},
    "cazac_roc": {"kind": "roc", "x": "false_alarm_rate", "y": ["detection_rate"], "group": "waveform", "xlabel": "false alarm rate", "ylabel": "detection rate", "logx": True},
    "fx_curve": {"kind": "line", "x": "x", "y": ["fx"], "xlabel": "x", "ylabel": "f(x)"},
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one experiment, optionally plot its main table, and write the manifest."""
    runner = RUNNERS[config.experiment]
    log.set_env(config.experiment)
    task = log.start(f"experiment {config.experiment} (seed={config.seed}, scale={config.scale})")
    start = time()
    try:
        result = runner(config)
    except Exception:
        log.finish(task, success=False)
        raise
    if config.plot:
        from .plotting import emit_plot

        main = result.files[config.experiment]
        result.files[f"{config.experiment}_svg"] = emit_plot(main, PLOT_STYLES[config.experiment], main[:-4] + ".svg")
    result.manifest_path = write_manifest(config, result, time() - start)
    log.finish(task, f"-> {result.output_dir}")
    return result
