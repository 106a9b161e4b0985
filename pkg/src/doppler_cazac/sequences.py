"""Generators for ZC, unified CAZAC and differential ZC sequences."""

from typing import Optional, Union

import numpy as np

from .classes import (
    CAZAC_TOLERANCE,
    CazacParams,
    CazacVerification,
    ComplexSequence,
    ParameterError,
    ZcParams,
    as_samples,
)
from .utils import log, totatives

__all__ = [
    "generate_zc",
    "generate_cazac",
    "generate_dzc",
    "verify_cazac",
    "differential_decode",
    "random_cazac_params",
    "zc_equivalent_cazac",
]


def _zc_phase_numerator(N: int, p: int) -> np.ndarray:
    """Exact p·n·(n+1) mod 2N for n = 0..N-1."""
    n = np.arange(N, dtype=np.int64)
    tri = (n * (n + 1)) % (2 * N)
    return (p * tri) % (2 * N)


def generate_zc(params: ZcParams) -> ComplexSequence:
    """
    Zadoff-Chu sequence s[n] = exp(-j·π·p·n·(n+1)/N).

    The exponent is reduced modulo 2N in integer arithmetic before the
    complex exponential, so long sequences keep full phase accuracy.

    Args:
        params (ZcParams): Validated length and root index

    Returns:
        ComplexSequence: Unit-modulus samples of length N
    """
    N, p = params.N, params.p
    k = _zc_phase_numerator(N, p)
    samples = np.exp(-1j * np.pi * k / N)
    log.trace(f"Generated ZC sequence N={N} p={p}")
    return ComplexSequence(samples, kind="zc", provenance={"N": N, "p": p})


def generate_cazac(params: CazacParams) -> ComplexSequence:
    """
    Unified CAZAC sequence of length N = r·m².

    Sample n = β·m + γ equals exp(j·2π·g(β, γ)/(r·m)) with
    g(β, γ) = m·c_r·phi·β² + varphi(γ)·β + psi(γ).

    Args:
        params (CazacParams): Validated construction parameters

    Returns:
        ComplexSequence: Unit-modulus samples of length r·m²
    """
    r, m = params.r, params.m
    rm = r * m
    n = np.arange(params.N, dtype=np.int64)
    beta, gamma = np.divmod(n, m)
    varphi = params.varphi_table
    two_c_r = 2 if r % 2 == 1 else 1

    # 2·g without psi, kept integral: c_r = 1/2 makes m·c_r·phi·β² a half-integer
    quad = (m * two_c_r * params.phi * ((beta * beta) % (2 * rm))) % (2 * rm)
    lin = (2 * varphi[gamma] * beta) % (2 * rm)
    g2 = (quad + lin) % (2 * rm)
    phase = np.pi * g2 / rm + 2.0 * np.pi * params.psi_table[gamma] / rm
    log.trace(f"Generated CAZAC sequence {params.describe()}")
    return ComplexSequence(np.exp(1j * phase), kind="cazac", provenance=params.describe())


def generate_dzc(base: ZcParams) -> ComplexSequence:
    """
    Differentially encoded ZC sequence x[n] = s[0]·s[1]···s[n].

    The running product is evaluated in closed form: the exponents sum to
    p·n·(n+1)·(n+2)/3, reduced modulo 2N. The encoding is periodic (and its
    circular decode exact) only when 3 does not divide N.
    """
    N, p = base.N, base.p
    if N % 3 == 0:
        log.warn(f"DZC length N={N} is a multiple of 3, circular decode is not exact at n=0")
    n = np.arange(N, dtype=np.int64)
    tetra = ((n * (n + 1)) % (6 * N) * (n + 2) % (6 * N)) // 3
    k = (p * (tetra % (2 * N))) % (2 * N)
    samples = np.exp(-1j * np.pi * k / N)
    return ComplexSequence(samples, kind="dzc", provenance={"N": N, "p": p, "encoding": "cumulative_product"})


def differential_decode(
    samples: Union[ComplexSequence, np.ndarray],
    previous: Optional[complex] = None,
) -> np.ndarray:
    """
    d[n] = y[n]·conj(y[n-1]).

    Args:
        samples: Received block y
        previous: Sample preceding y[0] in the continuous stream. When None
            the block is treated as circular and y[N-1] is used.

    Returns:
        np.ndarray: Decoded block of the same length
    """
    y = as_samples(samples)
    if y.size == 0:
        raise ParameterError("Cannot decode an empty block", "differential_decode")
    prior = np.empty_like(y)
    prior[1:] = y[:-1]
    prior[0] = y[-1] if previous is None else previous
    return y * np.conj(prior)


def verify_cazac(seq: Union[ComplexSequence, np.ndarray], tol: float = CAZAC_TOLERANCE) -> CazacVerification:
    """
    Check the constant-amplitude and zero-autocorrelation properties.

    Args:
        seq: Sequence to check
        tol (float): Amplitude tolerance; the autocorrelation tolerance is tol·N

    Returns:
        CazacVerification: Flags plus the worst deviations found
    """
    if tol < 0:
        raise ParameterError(f"Tolerance must be non-negative, got {tol}", "verify_cazac")
    s = as_samples(seq)
    if s.size == 0:
        raise ParameterError("Cannot verify an empty sequence", "verify_cazac")
    N = s.size
    amp_dev = float(np.max(np.abs(np.abs(s) - 1.0)))
    spectrum = np.fft.fft(s)
    acf = np.fft.ifft(spectrum * np.conj(spectrum))
    sidelobe = float(np.max(np.abs(acf[1:]))) if N > 1 else 0.0
    return CazacVerification(
        constant_amplitude=amp_dev <= tol,
        zero_autocorrelation=sidelobe <= tol * N,
        max_amplitude_deviation=amp_dev,
        max_sidelobe=sidelobe,
        tolerance=tol,
    )


def random_cazac_params(r: int, m: int, rng: np.random.Generator) -> CazacParams:
    """
    Draw full-family parameters: phi uniform over the totatives of r and a
    uniformly random varphi table whose residues mod m form a permutation.
    """
    phis = totatives(r) if r > 1 else [1]
    phi = int(phis[int(rng.integers(len(phis)))])
    perm = rng.permutation(m)
    offsets = rng.integers(0, r, size=m)
    varphi = tuple(int(m * t + g) for t, g in zip(offsets, perm))
    return CazacParams(r=r, m=m, phi=phi, varphi=varphi)


def zc_equivalent_cazac(params: ZcParams) -> CazacParams:
    """
    Unified-form parameters (r=N, m=1) whose correlation magnitudes match
    ZC(N, p) at every lag and Doppler.

    Both sequences are quadratic-phase; exp(-jπ·p·n(n+1)/N) and
    exp(j2π·phi·n²/N) differ by a linear phase when 2·phi ≡ -p (mod N).
    """
    N, p = params.N, params.p
    inv2 = (N + 1) // 2
    phi = ((N - p) * inv2) % N
    return CazacParams(r=N, m=1, phi=phi, a=0)
