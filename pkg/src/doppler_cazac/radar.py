"""Multi-target echo synthesis, range-Doppler processing, detection and ROC sweeps."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sp_fft

from .classes import (
    CazacParams,
    ComplexSequence,
    DetectionReport,
    DopplerSpec,
    ParameterError,
    RangeProfile,
    Rdm,
    RocCurve,
    Scenario,
    Target,
    ZcParams,
    as_samples,
)
from .correlation import circular_xcorr
from .design import max_normalized_doppler, roi_lag_bound
from .sequences import differential_decode, generate_cazac, generate_dzc, generate_zc
from .utils import log

__all__ = [
    "Waveform",
    "target_delay",
    "target_doppler",
    "doppler_of_bin",
    "noise_block",
    "draw_targets",
    "synthesize_echo",
    "synthesize_repetitions",
    "compute_rdm",
    "simulate_rdm",
    "detection_lag_window",
    "detect",
    "match_detections",
    "dzc_receive_chain",
    "roc_sweep",
]

# Second key word separating the RNG streams of one trial
NOISE_STREAM = 0
TARGET_STREAM = 1


@dataclass(frozen=True, eq=False)
class Waveform:
    """
    A transmit sequence plus the receive chain that turns echoes into range profiles.

    Attributes:
        kind (str): "zc", "cazac" or "dzc"
        transmitted (ComplexSequence): Samples put on air
        reference (ComplexSequence): Correlation reference (the base ZC for DZC)
        label (str): Name used in tables and logs
    """

    kind: str
    transmitted: ComplexSequence
    reference: ComplexSequence
    label: str = ""
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def zc(cls, params: ZcParams, label: Optional[str] = None) -> "Waveform":
        seq = generate_zc(params)
        return cls("zc", seq, seq, label or f"zc_p{params.p}", {"N": params.N, "p": params.p})

    @classmethod
    def cazac(cls, params: CazacParams, label: Optional[str] = None) -> "Waveform":
        seq = generate_cazac(params)
        return cls("cazac", seq, seq, label or "cazac", params.describe())

    @classmethod
    def dzc(cls, base: ZcParams, label: Optional[str] = None) -> "Waveform":
        return cls("dzc", generate_dzc(base), generate_zc(base), label or "dzc", {"N": base.N, "p": base.p})

    @property
    def N(self) -> int:
        return self.transmitted.length

    @property
    def differential(self) -> bool:
        return self.kind == "dzc"

    def range_profile(self, received: Union[ComplexSequence, np.ndarray], previous: Optional[complex] = None) -> RangeProfile:
        if self.differential:
            return circular_xcorr(differential_decode(received, previous), self.reference)
        return circular_xcorr(received, self.reference)

    def range_profiles(self, echoes: np.ndarray) -> np.ndarray:
        """
        Correlate a K x N block of repetitions in one pass.

        DZC rows are decoded against the last sample of the preceding row;
        the first row wraps circularly.
        """
        Y = np.asarray(echoes, dtype=np.complex128)
        if Y.ndim != 2 or Y.shape[1] != self.N:
            raise ParameterError(f"Expected a K x {self.N} block, got {Y.shape}", "range_profiles")
        if self.differential:
            prior = np.roll(Y, 1, axis=1)
            prior[1:, 0] = Y[:-1, -1]
            Y = Y * np.conj(prior)
        ref = np.conj(sp_fft.fft(self.reference.samples))
        return sp_fft.ifft(sp_fft.fft(Y, axis=1) * ref[None, :], axis=1)


def target_delay(target: Target, scenario: Scenario) -> int:
    """Round-trip delay in samples, rounded to the nearest lag, modulo N."""
    phys = scenario.physical
    return int(np.rint(2.0 * target.d / (phys.c * phys.T_s))) % scenario.N


def target_doppler(target: Target, scenario: Scenario) -> float:
    phys = scenario.physical
    return DopplerSpec.from_velocity(target.u, phys.f_c, phys.T_s, phys.c).v


def doppler_of_bin(q: Union[int, np.ndarray], N: int, K0: int) -> Union[float, np.ndarray]:
    """Signed normalized Doppler of bin q; bins at or above K0/2 fold to negative."""
    q = np.asarray(q, dtype=np.int64) % K0
    signed = np.where(q >= K0 / 2, q - K0, q)
    res = signed / (N * K0)
    return float(res) if res.ndim == 0 else res


def _rng(seed: int, *words: int) -> np.random.Generator:
    # Philox is counter-based: every (seed, trial, stream, k) key is an independent stream
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *words])))


def noise_block(seed: int, trial: int, k: int, N: int, sigma: float) -> np.ndarray:
    """Circular complex Gaussian noise of variance sigma² for repetition k of a trial."""
    if sigma == 0:
        return np.zeros(N, dtype=np.complex128)
    z = _rng(seed, trial, NOISE_STREAM, k).standard_normal((2, N))
    return (sigma / np.sqrt(2.0)) * (z[0] + 1j * z[1])


def draw_targets(scenario: Scenario, trial: int) -> Tuple[Target, ...]:
    """
    Uniform target draws for one trial: d in [0, D_r], u in [-u_max, u_max],
    unit gain with uniform phase. The draw depends on (seed, trial) only so
    every waveform sees the same targets.
    """
    rng = _rng(scenario.seed, trial, TARGET_STREAM)
    L = scenario.num_targets
    phys = scenario.physical
    d = rng.uniform(0.0, phys.D_r, size=L)
    u = rng.uniform(-phys.u_max, phys.u_max, size=L)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=L)
    return tuple(Target(float(d[i]), float(u[i]), complex(np.exp(1j * theta[i]))) for i in range(L))


def _echo_components(scenario: Scenario, seq: np.ndarray, targets: Sequence[Target]) -> Tuple[np.ndarray, np.ndarray]:
    """Per-target first-repetition echoes (L x N) and per-repetition phase steps 2π·N·v."""
    N = seq.size
    n = np.arange(N)
    base = np.zeros((len(targets), N), dtype=np.complex128)
    steps = np.zeros(len(targets))
    for i, tgt in enumerate(targets):
        v = target_doppler(tgt, scenario)
        base[i] = tgt.h * np.roll(seq, target_delay(tgt, scenario)) * np.exp(2j * np.pi * n * v)
        steps[i] = 2.0 * np.pi * N * v
    return base, steps


def synthesize_echo(
    scenario: Scenario,
    seq: Union[ComplexSequence, np.ndarray],
    k: int,
    trial: int = 0,
    targets: Optional[Sequence[Target]] = None,
) -> ComplexSequence:
    """
    Received block of repetition k.

    y_k[n] = sum_l h_l·seq[<n - tau_l> mod N]·exp(j·2π·(k·N + n)·v_l) + w[n].
    The k·N term keeps the Doppler phase continuous across repetitions. The
    noise stream is keyed by (seed, trial, k) and can be regenerated alone.

    Args:
        scenario (Scenario): Targets, SNR, sizes and seed
        seq: Transmitted sequence of length N
        k (int): Repetition index
        trial (int): Monte-Carlo trial index (0 for single runs)
        targets (Sequence[Target], optional): Overrides scenario.targets

    Returns:
        ComplexSequence: Received samples
    """
    s = as_samples(seq)
    if s.size != scenario.N:
        raise ParameterError(f"Sequence length {s.size} != scenario N={scenario.N}", "synthesize_echo")
    targets = scenario.targets if targets is None else targets
    base, steps = _echo_components(scenario, s, targets)
    y = np.exp(1j * steps * k) @ base if len(targets) else np.zeros(scenario.N, dtype=np.complex128)
    y = y + noise_block(scenario.seed, trial, k, scenario.N, scenario.noise_std)
    return ComplexSequence(y, kind="raw", provenance={"k": k, "trial": trial})


def synthesize_repetitions(
    scenario: Scenario,
    seq: Union[ComplexSequence, np.ndarray],
    trial: int = 0,
    targets: Optional[Sequence[Target]] = None,
) -> np.ndarray:
    """All K repetitions as a K x N array; row k equals synthesize_echo(..., k)."""
    s = as_samples(seq)
    if s.size != scenario.N:
        raise ParameterError(f"Sequence length {s.size} != scenario N={scenario.N}", "synthesize_repetitions")
    targets = scenario.targets if targets is None else targets
    base, steps = _echo_components(scenario, s, targets)
    k = np.arange(scenario.K)
    Y = np.exp(1j * np.outer(k, steps)) @ base if len(targets) else np.zeros((scenario.K, scenario.N), dtype=np.complex128)
    sigma = scenario.noise_std
    if sigma > 0:
        Y = Y + np.stack([noise_block(scenario.seed, trial, int(i), scenario.N, sigma) for i in k])
    return Y


def compute_rdm(profiles: Union[Sequence[RangeProfile], np.ndarray], K0: int) -> Rdm:
    """
    E(n, q) = sum_k r_k[n]·exp(-j·2π·k·q/K0), zero-padded slow-time DFT.

    Args:
        profiles: K range profiles, or a K x N array of their values
        K0 (int): DFT size, K0 >= K

    Returns:
        Rdm: N x K0 grid
    """
    if isinstance(profiles, np.ndarray):
        R = profiles
    else:
        if not profiles:
            raise ParameterError("No range profiles given", "compute_rdm")
        lengths = {p.length for p in profiles}
        if len(lengths) != 1:
            raise ParameterError(f"Range profiles differ in length: {sorted(lengths)}", "compute_rdm")
        R = np.stack([p.values for p in profiles])
    K = R.shape[0]
    if K0 < K:
        raise ParameterError(f"K0={K0} is smaller than K={K}", "compute_rdm")
    return Rdm(sp_fft.fft(R, n=K0, axis=0).T)


def simulate_rdm(scenario: Scenario, waveform: Waveform, trial: int = 0, targets: Optional[Sequence[Target]] = None) -> Rdm:
    Y = synthesize_repetitions(scenario, waveform.transmitted, trial, targets)
    return compute_rdm(waveform.range_profiles(Y), scenario.K0)


def detection_lag_window(scenario: Scenario) -> int:
    """Largest absolute lag a target inside D_r can round to, clipped to N-1."""
    return min(int(ceil(roi_lag_bound(scenario.physical))), scenario.N - 1)


def _cell_statistics(rdm: Rdm, v_limit: float, max_lag: Optional[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lags, bins and |E|²/θ over the tested window."""
    power = rdm.power
    total = power.sum()
    lags = np.arange(rdm.N if max_lag is None else min(max_lag, rdm.N - 1) + 1)
    v = np.abs(doppler_of_bin(np.arange(rdm.K0), rdm.N, rdm.K0))
    bins = np.nonzero(v <= v_limit * (1 + 1e-12))[0]
    cells = power[np.ix_(lags, bins)]
    # θ = (S - |E|²)/(N·K0 - 1): the global average excluding the cell under test
    theta = (total - cells) / (rdm.N * rdm.K0 - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = np.where(theta > 0, cells / np.where(theta > 0, theta, 1.0), np.where(cells > 0, np.inf, 0.0))
    return lags, bins, stat


def detect(rdm: Rdm, gamma: float, v_limit: float, max_lag: Optional[int] = None) -> DetectionReport:
    """
    Threshold test |E(n, q)|²/θ(n, q) > gamma over the tested cells.

    Args:
        rdm (Rdm): Range-Doppler map
        gamma (float): Threshold, >= 0
        v_limit (float): Only bins with |v(q)| <= v_limit are tested
        max_lag (int, optional): Only lags 0..max_lag are tested, all when None

    Returns:
        DetectionReport: Firing cells, unmatched
    """
    if gamma < 0:
        raise ParameterError(f"Threshold must be non-negative, got {gamma}", "detect")
    lags, bins, stat = _cell_statistics(rdm, v_limit, max_lag)
    rows, cols = np.nonzero(stat > gamma)
    return DetectionReport(
        lags=lags[rows],
        bins=bins[cols],
        statistics=stat[rows, cols],
        cells_tested=int(stat.size),
    )


def _match_matrix(
    lags: np.ndarray,
    bins: np.ndarray,
    targets: Sequence[Target],
    scenario: Scenario,
    K0: int,
    range_only: bool,
) -> np.ndarray:
    """Boolean (cells x targets) matrix of the permissible-error test."""
    phys = scenario.physical
    if not len(targets):
        return np.zeros((lags.size, 0), dtype=bool)
    d = np.array([t.d for t in targets])
    u = np.array([t.u for t in targets])
    est_d = lags * phys.c * phys.T_s / 2.0
    match = np.abs(est_d[:, None] - d[None, :]) < phys.c * phys.T_s / 4.0
    if not range_only:
        est_u = doppler_of_bin(bins, scenario.N, K0) * phys.c / (2.0 * phys.f_c * phys.T_s)
        u_tol = phys.c / (4.0 * scenario.N * K0 * phys.T_s * phys.f_c)
        match &= np.abs(np.atleast_1d(est_u)[:, None] - u[None, :]) < u_tol
    return match


def match_detections(
    report: DetectionReport,
    truth: Sequence[Target],
    scenario: Scenario,
    range_only: bool = False,
) -> DetectionReport:
    """
    Score firing cells against the true targets.

    A cell matches target l when its distance estimate n·c·T_s/2 is within
    c·T_s/4 of d_l and its velocity estimate v(q)·c/(2·f_c·T_s) is within
    c/(4·N·K0·T_s·f_c) of u_l. Each target counts once; a firing cell that
    matches no target is one false cell.

    Args:
        report (DetectionReport): Output of detect()
        truth (Sequence[Target]): True targets
        scenario (Scenario): Physical setup and sizes
        range_only (bool): Skip the velocity test (zero-Doppler receive chains)

    Returns:
        DetectionReport: Same cells with the matching counters filled in
    """
    match = _match_matrix(report.lags, report.bins, truth, scenario, scenario.K0, range_only)
    matched = int(match.any(axis=0).sum()) if match.size else 0
    false_cells = int((~match.any(axis=1)).sum()) if match.shape[1] else len(report)
    return DetectionReport(
        lags=report.lags,
        bins=report.bins,
        statistics=report.statistics,
        cells_tested=report.cells_tested,
        matched_targets=matched,
        false_cells=false_cells,
        num_targets=len(truth),
    )


def dzc_receive_chain(
    received: Union[ComplexSequence, np.ndarray],
    base: ZcParams,
    previous: Optional[complex] = None,
) -> RangeProfile:
    """Differential decode followed by circular correlation against the base ZC."""
    y = as_samples(received)
    if y.size != base.N:
        raise ParameterError(f"Received length {y.size} != N={base.N}", "dzc_receive_chain")
    return circular_xcorr(differential_decode(y, previous), generate_zc(base))


def _trial_rates(
    scenario: Scenario,
    waveform: Waveform,
    gammas: np.ndarray,
    trial: int,
    v_limit: float,
    range_only: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    targets = draw_targets(scenario, trial)
    rdm = simulate_rdm(scenario, waveform, trial, targets)
    lags, bins, stat = _cell_statistics(rdm, v_limit, detection_lag_window(scenario))
    n_grid, q_grid = np.meshgrid(lags, bins, indexing="ij")
    match = _match_matrix(n_grid.ravel(), q_grid.ravel(), targets, scenario, rdm.K0, range_only)
    flat = stat.ravel()

    # target l is detected at gamma iff its strongest matching cell exceeds gamma
    if match.shape[1]:
        best = np.where(match, flat[:, None], -np.inf).max(axis=0)
        detected = (best[None, :] > gammas[:, None]).sum(axis=1)
        unmatched = np.sort(flat[~match.any(axis=1)])
    else:
        detected = np.zeros(gammas.size)
        unmatched = np.sort(flat)
    false_cells = unmatched.size - np.searchsorted(unmatched, gammas, side="right")
    dr = detected / len(targets) if targets else np.zeros(gammas.size)
    return false_cells / flat.size, dr


def roc_sweep(
    scenario: Scenario,
    waveform: Waveform,
    gamma_grid: Sequence[float],
    trials: int,
    v_limit: Optional[float] = None,
    range_only: Optional[bool] = None,
    workers: Optional[int] = None,
) -> RocCurve:
    """
    Monte-Carlo ROC over a threshold grid.

    Each trial draws targets and noise from (seed, trial), builds one RDM and
    evaluates every threshold against it. Targets and noise do not depend on
    the waveform, so curves of different waveforms are paired. Trials run
    concurrently and are averaged in trial order.

    Args:
        scenario (Scenario): Sizes, SNR, physical setup, num_targets and seed
        waveform (Waveform): Transmit sequence and receive chain
        gamma_grid: Strictly increasing thresholds
        trials (int): Number of Monte-Carlo trials, >= 1
        v_limit (float, optional): Doppler search limit. Defaults to v̄, or 0
            for differential chains whose energy sits in the zero bin
        range_only (bool, optional): Match on range only. Defaults to True for
            differential chains
        workers (int, optional): Thread count

    Returns:
        RocCurve: Trial-averaged (false alarm, detection) rates per threshold
    """
    gammas = np.asarray(gamma_grid, dtype=float)
    if gammas.size == 0:
        raise ParameterError("Empty threshold grid", "roc_sweep")
    if gammas.size > 1 and not np.all(np.diff(gammas) > 0):
        raise ParameterError("Threshold grid must be strictly increasing", "roc_sweep")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}", "roc_sweep")
    if waveform.N != scenario.N:
        raise ParameterError(f"Waveform length {waveform.N} != scenario N={scenario.N}", "roc_sweep")
    if v_limit is None:
        v_limit = 0.0 if waveform.differential else max_normalized_doppler(scenario.physical)
    if range_only is None:
        range_only = waveform.differential

    def run(trial: int) -> Tuple[np.ndarray, np.ndarray]:
        return _trial_rates(scenario, waveform, gammas, trial, v_limit, range_only)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(run, range(trials)))
    fa = np.zeros(gammas.size)
    dr = np.zeros(gammas.size)
    for trial_fa, trial_dr in results:
        fa += trial_fa
        dr += trial_dr
    log.debug(f"ROC sweep {waveform.label}: {trials} trials x {gammas.size} thresholds")
    return RocCurve(
        gammas=gammas,
        false_alarm_rates=fa / trials,
        detection_rates=dr / trials,
        trials=trials,
        seed=scenario.seed,
        label=waveform.label,
        metadata={
            "waveform": waveform.label,
            "kind": waveform.kind,
            "v_limit": v_limit,
            "range_only": range_only,
            "shared_target_draws": True,
            "false_alarm_normalization": "per tested cell",
            "lag_window": detection_lag_window(scenario),
        },
    )
