"""Doppler-corrupted circular correlation: numerical paths, closed forms and PSLR."""

from math import gcd, pi, sin
from typing import Tuple, Union

import numpy as np
from scipy import fft as sp_fft

from .classes import (
    PSLR_CAP,
    SATURATION_FLOOR,
    AssumptionError,
    CazacParams,
    ComplexSequence,
    ParameterError,
    PslrMeasurement,
    RangeProfile,
    ResidueTable,
    RoI,
    ZcParams,
    as_samples,
)
from .utils import centered_mod, centered_residues, log

__all__ = [
    "apply_doppler_delay",
    "circular_xcorr",
    "dirichlet_magnitude",
    "sample_fx",
    "zc_xcorr_closed_form",
    "residue_map",
    "residue_system",
    "sp_lag_bound",
    "max_sidelobe",
    "measure_pslr",
    "pslr",
    "closed_form_pslr",
    "cazac_xcorr_bound",
]

ArrayOrInt = Union[int, np.ndarray]


def apply_doppler_delay(
    seq: Union[ComplexSequence, np.ndarray],
    tau: int,
    v: float,
    gain: complex = 1.0,
) -> ComplexSequence:
    """
    Single noiseless echo: out[n] = gain·seq[<n - tau> mod N]·exp(j·2π·n·v).

    Args:
        seq: Transmitted sequence
        tau (int): Circular delay in samples, 0 <= tau < N
        v (float): Normalized Doppler shift per sample
        gain (complex): Round-trip gain

    Returns:
        ComplexSequence: The delayed, Doppler-rotated copy
    """
    s = as_samples(seq)
    N = s.size
    if not 0 <= tau < N:
        raise ParameterError(f"Delay tau={tau} outside [0, {N})", "apply_doppler_delay")
    n = np.arange(N)
    out = gain * np.roll(s, tau) * np.exp(2j * np.pi * n * v)
    provenance = {"tau": int(tau), "v": float(v)}
    if isinstance(seq, ComplexSequence):
        provenance = {**seq.provenance, **provenance}
    return ComplexSequence(out, kind="raw", provenance=provenance)


def circular_xcorr(
    received: Union[ComplexSequence, np.ndarray],
    reference: Union[ComplexSequence, np.ndarray],
    direct: bool = False,
) -> RangeProfile:
    """
    r[n] = sum_i received[i]·conj(reference[<i - n> mod N]).

    Args:
        received: Received block y
        reference: Reference sequence s, same length
        direct (bool): Use the O(N²) lag-by-lag sum instead of the FFT path

    Returns:
        RangeProfile: One complex value per lag
    """
    y = as_samples(received)
    s = as_samples(reference)
    if y.shape != s.shape:
        raise ParameterError(
            f"Length mismatch: received {y.size}, reference {s.size}",
            "circular_xcorr",
        )
    if direct:
        values = np.array([np.vdot(np.roll(s, n), y) for n in range(s.size)])
    else:
        values = sp_fft.ifft(sp_fft.fft(y) * np.conj(sp_fft.fft(s)))
    return RangeProfile(values)


def dirichlet_magnitude(x: Union[float, np.ndarray], N: float) -> np.ndarray:
    """|sin(π·x)/sin(π·x/N)|, with the x -> 0 limit N."""
    x = np.asarray(x, dtype=float)
    den = np.sin(np.pi * x / N)
    small = np.abs(den) < 1e-15
    safe = np.where(small, 1.0, den)
    return np.where(small, float(N), np.abs(np.sin(np.pi * x) / safe))


def sample_fx(N: int, x: Union[float, np.ndarray]) -> np.ndarray:
    """Sample f(x) = |sin(πx)/sin(πx/N)| on a grid of (fractional) residues."""
    if N < 1:
        raise ParameterError(f"N must be positive, got {N}", "sample_fx")
    return dirichlet_magnitude(centered_mod(x, N), N)


def zc_xcorr_closed_form(params: ZcParams, tau: int, v: float, n: ArrayOrInt) -> Union[float, np.ndarray]:
    """
    Magnitude of the Doppler-corrupted ZC cross-correlation at lag n.

    Evaluates f(X) with X = <v·N - p·(n - tau)> centered mod N. The value
    is exact for any v; at n = tau it is the Doppler-attenuated peak
    |sin(π·v·N)/sin(π·v)|.

    Args:
        params (ZcParams): Sequence parameters
        tau (int): True delay
        v (float): Normalized Doppler shift
        n (int or np.ndarray): Lag(s) to evaluate

    Returns:
        float or np.ndarray: Magnitude(s), same shape as n
    """
    N, p = params.N, params.p
    lag = np.asarray(n, dtype=np.int64) - int(tau)
    # p·(n - tau) is an integer: reduce it exactly before adding the fractional part
    shift = (p * np.mod(lag, N)) % N
    X = centered_mod(v * N - shift, N)
    res = dirichlet_magnitude(X, N)
    return float(res) if np.ndim(n) == 0 else res


def residue_system(N: int, p: int) -> np.ndarray:
    """Centered residues <p·k> mod N for k = 0..N-1."""
    if N < 1 or N % 2 == 0:
        raise ParameterError(f"Residue system needs an odd modulus, got N={N}", "residue_system")
    if gcd(p, N) != 1:
        raise ParameterError(
            f"p={p} shares a factor with N={N}",
            "residue_system",
            details=f"gcd(p, N) = {gcd(p, N)}",
        )
    return centered_residues(p, N)


def residue_map(N: int, p: int) -> ResidueTable:
    """
    Table of |<p·k>| against k = |n - tau| for k = 0..(N-1)/2.

    For k <= A the entries are p·k; past A, k = A + j gives
    (A - j)·p + 2B + 1 for j = 1, 2, ... while that stays positive.

    Args:
        N (int): Odd modulus
        p (int): Root index coprime to N

    Returns:
        ResidueTable: Magnitudes plus the A, B constants
    """
    full = residue_system(N, p)
    half = (N - 1) // 2
    A = half // p
    B = half - A * p
    return ResidueTable(N=N, p=p, A=A, B=B, magnitudes=np.abs(full[: half + 1]))


def sp_lag_bound(N: int, p: int) -> int:
    """Exclusive two-sided bound 2·floor((N-1)/(2p)) of the S_p lag set."""
    if p < 1:
        raise ParameterError(f"Root index must be positive, got p={p}", "sp_lag_bound")
    return 2 * ((N - 1) // (2 * p))


def max_sidelobe(profile: Union[RangeProfile, np.ndarray], lags: np.ndarray) -> Tuple[float, int]:
    """Largest magnitude over the given lags and the lag where it sits."""
    mags = np.abs(as_samples(profile))
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0:
        raise ParameterError("Empty lag set", "max_sidelobe")
    i = int(np.argmax(mags[lags]))
    return float(mags[lags[i]]), int(lags[i])


def measure_pslr(profile: RangeProfile, roi: RoI) -> PslrMeasurement:
    """
    Peak-to-sidelobe ratio over the peak-relative RoI.

    The peak is the profile argmax (smallest lag on ties) and the sidelobes
    are lags peak+1 .. peak+ceil(n_max)-1 modulo N. A profile whose largest
    sidelobe is below 1e-9 of the peak is reported as saturated with the
    capped value 1e15.
    """
    lags = roi.lags(profile.length, profile.peak_index)
    if lags.size == 0:
        raise ParameterError(f"RoI n_max={roi.n_max} holds no sidelobe lag", "pslr")
    mags = profile.magnitudes
    peak_index = profile.peak_index
    peak = float(mags[peak_index])
    side, side_index = max_sidelobe(mags, lags)
    saturated = side <= SATURATION_FLOOR * peak
    linear = PSLR_CAP if saturated else min(peak / side, PSLR_CAP)
    return PslrMeasurement(
        linear=linear,
        saturated=saturated,
        peak_index=peak_index,
        sidelobe_index=side_index,
        peak_magnitude=peak,
        sidelobe_magnitude=side,
    )


def pslr(profile: RangeProfile, roi: RoI) -> float:
    return measure_pslr(profile, roi).linear


def closed_form_pslr(N: int, p: int, v_max: float) -> float:
    """
    Exact ZC PSLR over S_p under the worst-case Doppler v_max.

    The largest in-S_p sidelobe sits at |X| = p - v_max·N, so the ratio is
    |sin(π·(p - v_max·N)/N) / sin(π·v_max)|.

    Raises:
        ParameterError: v_max is zero (perfect autocorrelation, no finite ratio)
        AssumptionError: v_max·N >= 1
    """
    if v_max == 0:
        raise ParameterError("v_max = 0 gives a perfect autocorrelation, use the saturated branch", "closed_form_pslr")
    if abs(v_max) * N >= 1:
        raise AssumptionError(f"|v|·N = {abs(v_max) * N:.4f} >= 1", "closed_form_pslr")
    v = abs(v_max)
    return abs(sin(pi * (p - v * N) / N) / sin(pi * v))


def cazac_xcorr_bound(params: CazacParams, tau: int, v: float, n: ArrayOrInt) -> Union[float, np.ndarray]:
    """
    Upper bound on the Doppler-corrupted CAZAC cross-correlation at lag n.

    Sums f_{rm}(x(γ, n)) over the m cosets, with
    x(γ, n) = <2·c_r·m·phi·(β_tau - β_n) + varphi(γ_tau) - varphi(γ_n) + v·r·m²>
    centered mod r·m, where β·m + γ - tau = β_tau·m + γ_tau and
    β·m + γ - n = β_n·m + γ_n.
    """
    r, m = params.r, params.m
    rm = r * m
    varphi = params.varphi_table
    lags = np.atleast_1d(np.asarray(n, dtype=np.int64))
    gamma = np.arange(m, dtype=np.int64)[:, None]
    gamma_tau = np.mod(gamma - tau, m)
    gamma_n = np.mod(gamma - lags[None, :], m)
    beta_diff = (lags[None, :] - tau - gamma_tau + gamma_n) // m
    integer_part = (2 * m * params.phi * beta_diff) * params.c_r + varphi[gamma_tau] - varphi[gamma_n]
    x = centered_mod(np.mod(integer_part, rm) + v * r * m * m, rm)
    res = dirichlet_magnitude(x, rm).sum(axis=0)
    log.trace(f"CAZAC bound evaluated at {lags.size} lags")
    return float(res[0]) if np.ndim(n) == 0 else res
