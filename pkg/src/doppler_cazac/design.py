"""Root-index design for ZC and (phi, a) search for the unified CAZAC family."""

from concurrent.futures import ThreadPoolExecutor
from math import asin, floor, gcd, pi, sin
from time import time
from typing import List, Optional, Tuple

import numpy as np

from .classes import (
    PSLR_CAP,
    CazacParams,
    DesignResult,
    DopplerSpec,
    FeasibleRange,
    InfeasibleDesignError,
    ParameterError,
    PslrMeasurement,
    RoI,
    SensingRequirements,
    ZcParams,
    amplitude_db,
)
from .correlation import apply_doppler_delay, circular_xcorr, measure_pslr, sp_lag_bound, closed_form_pslr
from .sequences import generate_cazac, generate_zc, random_cazac_params
from .utils import log, totatives

__all__ = [
    "max_normalized_doppler",
    "roi_lag_bound",
    "zc_feasible_range",
    "zc_best_root",
    "verify_root",
    "cazac_pslr",
    "cazac_search",
    "sample_cazac_pslr",
    "average_parameter_cazac",
]


def max_normalized_doppler(req: SensingRequirements) -> float:
    """v̄ = 2·u_max·f_c·T_s/c."""
    return DopplerSpec.from_velocity(req.u_max, req.f_c, req.T_s, req.c).v


def roi_lag_bound(req: SensingRequirements) -> float:
    """n_max = 2·D_r/(c·T_s), the exclusive RoI lag bound."""
    return 2.0 * req.D_r / (req.c * req.T_s)


def _check_assumption(v_bar: float, N: int, operation: str):
    DopplerSpec(v_bar).check(N, operation)


def _candidate_roots(N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Roots 1..(N-1)/2 coprime to N with their A and B constants."""
    half = (N - 1) // 2
    p = np.arange(1, half + 1, dtype=np.int64)
    p = p[np.gcd(p, N) == 1]
    A = half // p
    B = half - A * p
    return p, A, B


def zc_feasible_range(N: int, req: SensingRequirements) -> FeasibleRange:
    """
    Root indices meeting the PSLR threshold inside the RoI.

    A root p is kept when gcd(p, N) = 1 and
    (N/π)·arcsin(P_r·sin(π·v̄)) + v̄·N <= p <= (N - 1 - 2·B(p))·c·T_s/(2·D_r).
    The upper bound depends on p through B, so membership is tested per
    candidate.

    Args:
        N (int): Odd sequence length
        req (SensingRequirements): Physical requirements

    Returns:
        FeasibleRange: Sorted feasible roots, possibly empty, with diagnostics

    Raises:
        AssumptionError: v̄·N >= 1
    """
    if N < 3 or N % 2 == 0:
        raise ParameterError(f"ZC length must be an odd integer >= 3, got N={N}", "zc_feasible_range")
    v_bar = max_normalized_doppler(req)
    _check_assumption(v_bar, N, "zc_feasible_range")
    n_max = roi_lag_bound(req)

    arg = req.P_r * sin(pi * v_bar)
    if arg > 1:
        diagnostics = f"threshold unachievable: P_r·sin(π·v̄) = {arg:.4f} > 1"
        log.debug(diagnostics)
        return FeasibleRange(roots=(), lower_bound=float("inf"), upper_bound=0.0, diagnostics=diagnostics)
    lower = N / pi * asin(arg) + v_bar * N

    p, A, B = _candidate_roots(N)
    upper = (N - 1 - 2 * B) / n_max
    keep = (p >= lower) & (p <= upper) & (2 * A >= n_max)
    roots = tuple(int(x) for x in p[keep])
    if roots:
        upper_at_max = float(upper[keep][-1])
        diagnostics = f"{len(roots)} feasible roots in [{roots[0]}, {roots[-1]}]"
    else:
        upper_at_max = float(upper.max()) if upper.size else 0.0
        diagnostics = f"no root satisfies {lower:.3f} <= p <= (N-1-2B)/{n_max:.3f}"
    log.debug(f"Feasible range N={N}: {diagnostics}")
    return FeasibleRange(roots=roots, lower_bound=lower, upper_bound=upper_at_max, diagnostics=diagnostics)


def zc_best_root(N: int, req: SensingRequirements) -> DesignResult:
    """
    Largest root whose own S_p lag set still covers the RoI.

    Scans p downward from floor((N-1)·c·T_s/(2·D_r)) and accepts the first p
    with gcd(p, N) = 1 and p <= (N - 1 - 2·B(p))·c·T_s/(2·D_r). The PSLR
    threshold does not take part; the achieved value is the exact one for
    the accepted root.

    Args:
        N (int): Odd sequence length
        req (SensingRequirements): Physical requirements

    Returns:
        DesignResult: parameter p, or feasible=False with a diagnostic
    """
    if N < 3 or N % 2 == 0:
        raise ParameterError(f"ZC length must be an odd integer >= 3, got N={N}", "zc_best_root")
    v_bar = max_normalized_doppler(req)
    _check_assumption(v_bar, N, "zc_best_root")
    n_max = roi_lag_bound(req)
    if n_max > N - 1:
        return DesignResult(
            parameter=None,
            achieved_pslr=0.0,
            roi_bound=n_max,
            feasible=False,
            diagnostics=f"RoI bound {n_max:.2f} exceeds N-1 = {N - 1}, no S_p can contain it",
        )

    start = min(int(floor((N - 1) / n_max)), (N - 1) // 2)
    evaluations = 0
    for p in range(start, 0, -1):
        evaluations += 1
        if gcd(p, N) != 1:
            continue
        A = (N - 1) // (2 * p)
        B = (N - 1) // 2 - A * p
        if p * n_max <= N - 1 - 2 * B:
            achieved = closed_form_pslr(N, p, v_bar) if v_bar > 0 else PSLR_CAP
            diagnostics = f"A={A}, B={B}, |S_p| bound={sp_lag_bound(N, p)} >= RoI {n_max:.2f}"
            if achieved < req.P_r:
                diagnostics += f"; PSLR {amplitude_db(achieved):.2f} dB below the {req.P_r_db:.2f} dB threshold"
            log.debug(f"Best root N={N}: p={p} ({diagnostics})")
            return DesignResult(
                parameter=p,
                achieved_pslr=achieved,
                roi_bound=n_max,
                feasible=True,
                diagnostics=diagnostics,
                evaluations=evaluations,
            )
    return DesignResult(
        parameter=None,
        achieved_pslr=0.0,
        roi_bound=n_max,
        feasible=False,
        diagnostics=f"no root p <= {start} coprime to N={N} has 2·A(p) >= {n_max:.2f}",
        evaluations=evaluations,
    )


def verify_root(N: int, p: int, req: SensingRequirements) -> Tuple[bool, PslrMeasurement]:
    """
    Directly measure the ZC PSLR over the RoI under the worst-case Doppler.

    The one-sided RoI is not symmetric in the Doppler sign, so both +v̄ and
    -v̄ are evaluated and the smaller PSLR is reported.

    Returns:
        Tuple[bool, PslrMeasurement]: (PSLR >= P_r, worst measurement)
    """
    params = ZcParams(N, p)
    v_bar = max_normalized_doppler(req)
    _check_assumption(v_bar, N, "verify_root")
    roi = RoI(roi_lag_bound(req))
    seq = generate_zc(params)

    worst: Optional[PslrMeasurement] = None
    for v in (v_bar, -v_bar) if v_bar > 0 else (0.0,):
        profile = circular_xcorr(apply_doppler_delay(seq, 0, v), seq)
        measurement = measure_pslr(profile, roi)
        if worst is None or measurement.linear < worst.linear:
            worst = measurement
    assert worst is not None
    return worst.linear >= req.P_r, worst


def cazac_pslr(params: CazacParams, v: float, roi: RoI) -> float:
    """PSLR of a unified CAZAC sequence against its own v-Doppler echo (tau = 0)."""
    seq = generate_cazac(params)
    return measure_pslr(circular_xcorr(apply_doppler_delay(seq, 0, v), seq), roi).linear


def cazac_search(
    r: int,
    m: int,
    req: SensingRequirements,
    workers: Optional[int] = None,
) -> DesignResult:
    """
    Exhaustive (phi, a) search over the restricted mapping family.

    Every phi in [1, r-1] coprime to r is paired with every a in
    [0, floor(r/m)]. Each candidate is evaluated at +v̄ with tau = 0 and
    the grid maximum is returned; ties resolve to the smallest phi, then the
    smallest a. Rows run concurrently, results are merged in input order.

    Args:
        r (int): Positive integer, r >= 2
        m (int): Square-free positive integer
        req (SensingRequirements): Physical requirements
        workers (int, optional): Thread count, executor default when None

    Returns:
        DesignResult: parameter (phi, a) with the full P(phi, a) grid

    Raises:
        InfeasibleDesignError: r = 1 leaves no phi to search
        AssumptionError: v̄·r·m² >= 1
    """
    phis = totatives(r)
    if not phis:
        raise InfeasibleDesignError(f"Empty search grid for r={r}", "cazac_search")
    # validates m before the pool starts
    CazacParams(r=r, m=m, phi=phis[0])
    N = r * m * m
    v_bar = max_normalized_doppler(req)
    _check_assumption(v_bar, N, "cazac_search")
    n_max = roi_lag_bound(req)
    roi = RoI(n_max)
    slopes = list(range(r // m + 1))

    def evaluate_row(phi: int) -> List[float]:
        return [cazac_pslr(CazacParams(r=r, m=m, phi=phi, a=a), v_bar, roi) for a in slopes]

    start = time()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(evaluate_row, phis))
    grid = np.array(rows, dtype=float)
    evaluations = int(grid.size)

    # row-major argmax returns the first maximum: smallest phi, then smallest a
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    phi_hat, a_hat = phis[int(i)], slopes[int(j)]
    best = float(grid[i, j])
    log.debug(f"CAZAC search r={r} m={m}: {evaluations} candidates in {time() - start:.2f}s")
    return DesignResult(
        parameter=(phi_hat, a_hat),
        achieved_pslr=best,
        roi_bound=n_max,
        feasible=True,
        diagnostics=f"{len(phis)} phi values x {len(slopes)} slopes",
        evaluations=evaluations,
        grid=grid,
        grid_axes=(tuple(phis), tuple(slopes)),
    )


def sample_cazac_pslr(
    r: int,
    m: int,
    req: SensingRequirements,
    n_random: int,
    rng: np.random.Generator,
) -> Tuple[List[CazacParams], np.ndarray]:
    """Draw n_random full-family parameter sets and their linear PSLRs at +v̄."""
    if n_random < 1:
        raise ParameterError(f"n_random must be >= 1, got {n_random}", "sample_cazac_pslr")
    v_bar = max_normalized_doppler(req)
    _check_assumption(v_bar, r * m * m, "sample_cazac_pslr")
    roi = RoI(roi_lag_bound(req))
    params = [random_cazac_params(r, m, rng) for _ in range(n_random)]
    values = np.array([cazac_pslr(prm, v_bar, roi) for prm in params])
    return params, values


def average_parameter_cazac(
    r: int,
    m: int,
    req: SensingRequirements,
    n_random: int,
    rng: np.random.Generator,
) -> Tuple[CazacParams, float]:
    """
    Pick a typical full-family CAZAC: the sample whose PSLR is closest to
    the sample mean in dB.

    Returns:
        Tuple[CazacParams, float]: The chosen parameters and the mean PSLR in dB
    """
    params, values = sample_cazac_pslr(r, m, req, n_random, rng)
    values_db = 20.0 * np.log10(values)
    mean_db = float(values_db.mean())
    chosen = params[int(np.argmin(np.abs(values_db - mean_db)))]
    log.debug(f"Average-parameter CAZAC {chosen.describe()} (mean {mean_db:.2f} dB over {n_random})")
    return chosen, mean_db
