import numpy as np
import pytest
from unittest.mock import patch

from doppler_cazac import (
    CazacParams,
    ParameterError,
    ZcParams,
    apply_doppler_delay,
    circular_xcorr,
    differential_decode,
    generate_cazac,
    generate_dzc,
    generate_zc,
    random_cazac_params,
    verify_cazac,
    zc_equivalent_cazac,
)
from doppler_cazac.utils import totatives


@pytest.mark.parametrize("N, p", [(7, 1), (7, 3), (101, 7), (1019, 21), (35537, 21), (35535, 19)])
def test_zc_is_cazac(N, p):
    """ZC sequences of odd length with a coprime root pass the CAZAC check."""
    seq = generate_zc(ZcParams(N, p))

    result = verify_cazac(seq)

    assert seq.length == N
    assert seq.kind == "zc"
    assert result.is_cazac


def test_zc_first_samples():
    """s[n] = exp(-jπ·p·n·(n+1)/N) on a short sequence."""
    seq = generate_zc(ZcParams(7, 3)).samples
    n = np.arange(7)

    assert np.allclose(seq, np.exp(-1j * np.pi * 3 * n * (n + 1) / 7), atol=1e-12)
    assert seq[0] == pytest.approx(1.0)


def test_zc_phase_stays_exact_at_long_lengths():
    """The last sample of a long sequence matches an exact integer phase reduction."""
    N, p = 35537, 21
    seq = generate_zc(ZcParams(N, p)).samples
    n = N - 1
    k = (p * n * (n + 1)) % (2 * N)

    assert seq[n] == pytest.approx(np.exp(-1j * np.pi * k / N), abs=1e-12)


@pytest.mark.parametrize("N, p", [(8, 1), (15, 5), (7, 0), (7, 7), (-3, 1)])
def test_zc_params_rejected(N, p):
    with pytest.raises(ParameterError):
        ZcParams(N, p)


def test_samples_are_read_only():
    seq = generate_zc(ZcParams(11, 2))

    with pytest.raises(ValueError):
        seq.samples[0] = 0


@pytest.mark.parametrize("r", [5, 7, 9, 12, 101])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_unified_construction_is_cazac(r, m, rng):
    """Every sampled (phi, a, psi) of the unified construction is CAZAC."""
    for phi in rng.choice(totatives(r), size=min(3, len(totatives(r))), replace=False):
        a = int(rng.integers(0, r // m + 1))
        psi = tuple(rng.uniform(0, 2 * np.pi, size=m))
        params = CazacParams(r=r, m=m, phi=int(phi), a=a, psi=psi)

        result = verify_cazac(generate_cazac(params), tol=1e-9)

        assert generate_cazac(params).length == r * m * m
        assert result.is_cazac, params.describe()


def test_random_full_family_is_cazac(rng):
    """Random phi plus a random permutation-valid varphi table still give CAZAC."""
    for _ in range(10):
        params = random_cazac_params(11, 3, rng)

        assert params.varphi is not None
        assert sorted(v % 3 for v in params.varphi) == [0, 1, 2]
        assert verify_cazac(generate_cazac(params)).is_cazac


def test_random_params_are_reproducible():
    a = random_cazac_params(101, 3, np.random.default_rng(5))
    b = random_cazac_params(101, 3, np.random.default_rng(5))

    assert a == b


@pytest.mark.parametrize(
    "kwargs",
    [
        {"r": 7, "m": 4, "phi": 1},
        {"r": 7, "m": 2, "phi": 7},
        {"r": 12, "m": 2, "phi": 3},
        {"r": 7, "m": 2, "phi": 1, "a": 4},
        {"r": 7, "m": 2, "phi": 1, "psi": (0.0,)},
        {"r": 101, "m": 3, "phi": 1, "varphi": (421, 816, 276)},
    ],
)
def test_cazac_params_rejected(kwargs):
    """Non square-free m, gcd(phi, r) > 1, slope out of range, bad tables."""
    with pytest.raises(ParameterError):
        CazacParams(**kwargs)


def test_verify_cazac_flags_failures():
    flat = verify_cazac(np.ones(16))
    uneven = verify_cazac(np.linspace(0.5, 1.5, 16) * np.exp(1j * np.arange(16)))

    assert flat.constant_amplitude
    assert not flat.zero_autocorrelation
    assert not uneven.constant_amplitude
    assert not uneven.is_cazac


def test_verify_cazac_rejects_empty_input():
    with pytest.raises(ParameterError):
        verify_cazac(np.array([], dtype=complex))


def test_dzc_decodes_to_base_zc():
    """Circular differential decode of DZC returns the base ZC when 3 does not divide N."""
    base = ZcParams(1019, 21)

    decoded = differential_decode(generate_dzc(base))

    assert np.allclose(decoded, generate_zc(base).samples, atol=1e-9)


def test_dzc_decode_cancels_doppler():
    """A Doppler-rotated DZC echo decodes to the base ZC times a constant phase."""
    base = ZcParams(101, 7)
    v = 0.3 / 101
    echo = apply_doppler_delay(generate_dzc(base), 0, v)

    decoded = differential_decode(echo)

    ratio = decoded[1:] / generate_zc(base).samples[1:]
    assert np.allclose(ratio, np.exp(2j * np.pi * v), atol=1e-9)


def test_differential_decode_uses_previous_sample():
    y = np.exp(1j * np.array([0.1, 0.4, 0.9]))

    decoded = differential_decode(y, previous=np.exp(0.5j))

    assert decoded[0] == pytest.approx(np.exp(-0.4j))
    assert decoded[2] == pytest.approx(np.exp(0.5j))


@patch("doppler_cazac.sequences.log")
def test_dzc_warns_on_multiple_of_three(mock_log):
    """N divisible by 3 breaks the periodic closure of the running product."""
    generate_dzc(ZcParams(21, 2))

    assert mock_log.warn.called


def test_dzc_noise_power_after_decode(rng):
    """Unit carrier plus noise decodes with extra noise power 2σ² + σ⁴; noise alone gives σ⁴."""
    sigma2 = 0.5
    size = 200_000
    w = np.sqrt(sigma2 / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))

    carrier = differential_decode(1.0 + w) - 1.0
    noise_only = differential_decode(w)

    assert np.mean(np.abs(carrier) ** 2) == pytest.approx(2 * sigma2 + sigma2**2, rel=0.05)
    assert np.mean(np.abs(noise_only) ** 2) == pytest.approx(sigma2**2, rel=0.05)


@pytest.mark.parametrize("N, p", [(101, 7), (101, 50), (1019, 21)])
def test_zc_equivalent_cazac_has_same_correlation(N, p):
    """The m=1 unified sequence reproduces the ZC correlation magnitudes under Doppler."""
    zc = generate_zc(ZcParams(N, p))
    cazac = generate_cazac(zc_equivalent_cazac(ZcParams(N, p)))
    v = 0.3 / N

    zc_mags = circular_xcorr(apply_doppler_delay(zc, 5, v), zc).magnitudes
    cazac_mags = circular_xcorr(apply_doppler_delay(cazac, 5, v), cazac).magnitudes

    assert np.allclose(zc_mags, cazac_mags, atol=1e-8 * N)
