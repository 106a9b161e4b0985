import numpy as np
import pytest

from conftest import make_requirements
from doppler_cazac import (
    CazacParams,
    ParameterError,
    Rdm,
    Scenario,
    Target,
    Waveform,
    ZcParams,
    apply_doppler_delay,
    average_parameter_cazac,
    cazac_search,
    compute_rdm,
    detect,
    detection_lag_window,
    differential_decode,
    doppler_of_bin,
    draw_targets,
    dzc_receive_chain,
    generate_zc,
    match_detections,
    max_normalized_doppler,
    noise_block,
    roi_lag_bound,
    roc_sweep,
    simulate_rdm,
    synthesize_echo,
    synthesize_repetitions,
    target_delay,
    target_doppler,
)
from doppler_cazac.radar import _cell_statistics

C, T_S, F_C = 3e8, 1e-9, 1e11


def _target(tau: float, v: float, h: complex = 1.0) -> Target:
    """Target whose round-trip delay is tau samples and whose normalized Doppler is v."""
    return Target(d=tau * C * T_S / 2.0, u=v * C / (2.0 * F_C * T_S), h=h)


@pytest.fixture
def small_scenario():
    """N=101, K=8, K0=32, RoI bound 19.5 lags, v̄·N = 0.3, noiseless."""
    return Scenario(
        targets=(),
        snr_db=float("inf"),
        N=101,
        K=8,
        omega=4,
        seed=7,
        physical=make_requirements(19.5, 0.3, 101),
    )


@pytest.fixture
def desk_scenario(desk_req):
    return Scenario(targets=(), snr_db=-5.0, N=1019, K=16, omega=4, seed=2024, physical=desk_req, num_targets=4)


def test_delay_rounds_to_nearest_lag(small_scenario):
    assert target_delay(_target(7.4, 0.0), small_scenario) == 7
    assert target_delay(_target(7.6, 0.0), small_scenario) == 8


def test_target_doppler(small_scenario):
    assert target_doppler(_target(3, 0.002), small_scenario) == pytest.approx(0.002)


def test_doppler_of_bin_signs():
    assert doppler_of_bin(0, 101, 32) == 0.0
    assert doppler_of_bin(3, 101, 32) == pytest.approx(3 / (101 * 32))
    assert doppler_of_bin(29, 101, 32) == pytest.approx(-3 / (101 * 32))
    assert doppler_of_bin(16, 101, 32) == pytest.approx(-16 / (101 * 32))


def test_scenario_rejects_fast_target(small_scenario):
    with pytest.raises(ParameterError):
        small_scenario.replace(targets=(_target(5, 0.5 / 101),))


def test_single_echo_matches_apply_doppler_delay(small_scenario):
    seq = generate_zc(ZcParams(101, 7))
    v = 0.2 / 101
    scenario = small_scenario.replace(targets=(_target(9, v, 0.5j),))

    first = synthesize_echo(scenario, seq, 0)
    second = synthesize_echo(scenario, seq, 1)

    expected = apply_doppler_delay(seq, 9, v, 0.5j).samples
    assert np.allclose(first.samples, expected)
    assert np.allclose(second.samples, expected * np.exp(2j * np.pi * 101 * v))


def test_repetitions_match_single_echoes(small_scenario):
    """Row k of the block equals the k-th echo, noise included."""
    seq = generate_zc(ZcParams(101, 7))
    scenario = small_scenario.replace(snr_db=0.0, targets=(_target(4, 0.1 / 101), _target(15, -0.25 / 101)))

    block = synthesize_repetitions(scenario, seq, trial=3)

    for k in range(scenario.K):
        assert np.allclose(block[k], synthesize_echo(scenario, seq, k, trial=3).samples)


def test_noise_is_keyed_and_scaled():
    a = noise_block(11, 0, 2, 50_000, 0.5)
    b = noise_block(11, 0, 2, 50_000, 0.5)
    c = noise_block(11, 1, 2, 50_000, 0.5)

    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    assert np.mean(np.abs(a) ** 2) == pytest.approx(0.25, rel=0.03)
    assert np.all(noise_block(11, 0, 0, 10, 0.0) == 0)


@pytest.mark.slow
def test_noise_power_over_ten_million_samples():
    sigma = 0.7
    blocks = [noise_block(99, 0, k, 1_000_000, sigma) for k in range(10)]

    power = np.mean([np.mean(np.abs(b) ** 2) for b in blocks])
    in_phase = np.mean([np.mean(b.real**2) for b in blocks])

    assert power == pytest.approx(sigma**2, rel=0.01)
    assert in_phase == pytest.approx(sigma**2 / 2, rel=0.01)


def test_decoded_noise_power_on_a_carrier(rng):
    """Decoding a unit carrier plus noise leaves an error of power 2σ² + σ⁴; noise alone gives σ⁴."""
    sigma = np.sqrt(0.5)
    n = 1_000_000
    carrier = np.exp(2j * np.pi * rng.uniform(size=n))
    noise = noise_block(5, 0, 0, n, sigma)

    error = differential_decode(carrier + noise) - differential_decode(carrier)

    assert np.mean(np.abs(error) ** 2) == pytest.approx(2 * sigma**2 + sigma**4, rel=0.02)
    assert np.mean(np.abs(differential_decode(noise)) ** 2) == pytest.approx(sigma**4, rel=0.02)


def test_rdm_peak_on_grid(small_scenario):
    """A target on the bin grid lands exactly on (tau, q); negative velocities fold to the top bins."""
    waveform = Waveform.zc(ZcParams(101, 7))
    K0 = small_scenario.K0

    ahead = simulate_rdm(small_scenario.replace(targets=(_target(7, 3 / (101 * K0)),)), waveform)
    behind = simulate_rdm(small_scenario.replace(targets=(_target(7, -3 / (101 * K0)),)), waveform)

    assert ahead.values.shape == (101, K0)
    assert ahead.argmax() == (7, 3)
    assert behind.argmax() == (7, K0 - 3)


def test_rdm_localization_random_targets(desk_scenario, rng):
    """Noiseless single targets: the RDM argmax inverts to (d, u) within the permissible errors."""
    scenario = desk_scenario.replace(snr_db=float("inf"))
    phys = scenario.physical
    waveform = Waveform.zc(ZcParams(1019, 21))
    K0 = scenario.K0
    d_tol = phys.c * phys.T_s / 4.0
    u_tol = phys.c / (4.0 * scenario.N * K0 * phys.T_s * phys.f_c)

    for _ in range(100):
        target = Target(float(rng.uniform(0, phys.D_r)), float(rng.uniform(-phys.u_max, phys.u_max)))
        rdm = simulate_rdm(scenario.replace(targets=(target,)), waveform)
        v = target_doppler(target, scenario)

        n, q = rdm.argmax()

        assert n == target_delay(target, scenario)
        assert q == int(np.rint(v * scenario.N * K0)) % K0
        assert abs(n * phys.c * phys.T_s / 2.0 - target.d) <= d_tol
        u_hat = doppler_of_bin(q, scenario.N, K0) * phys.c / (2.0 * phys.f_c * phys.T_s)
        assert abs(u_hat - target.u) <= u_tol


def test_compute_rdm_inputs(small_scenario):
    waveform = Waveform.zc(ZcParams(101, 7))
    scenario = small_scenario.replace(targets=(_target(5, 0.1 / 101),))
    block = synthesize_repetitions(scenario, waveform.transmitted)
    profiles = [waveform.range_profile(row) for row in block]

    from_list = compute_rdm(profiles, scenario.K0)
    from_array = compute_rdm(waveform.range_profiles(block), scenario.K0)

    assert np.allclose(from_list.values, from_array.values)
    with pytest.raises(ParameterError):
        compute_rdm(profiles, scenario.K - 1)
    with pytest.raises(ParameterError):
        compute_rdm([], 4)


def test_detect_and_match(small_scenario):
    target = _target(7, 3 / (101 * small_scenario.K0))
    scenario = small_scenario.replace(targets=(target,))
    rdm = simulate_rdm(scenario, Waveform.zc(ZcParams(101, 7)))
    v_limit = max_normalized_doppler(scenario.physical)
    strongest = detect(rdm, 0.0, v_limit).statistics.max()

    report = detect(rdm, 0.99 * strongest, v_limit)
    scored = match_detections(report, [target], scenario)

    assert [(n, q) for n, q, _ in report.detections] == [(7, 3)]
    assert scored.matched_targets == 1
    assert scored.false_cells == 0
    assert scored.detection_rate == 1.0
    assert scored.false_alarm_rate == 0.0


def test_detect_window_and_errors(small_scenario):
    rdm = simulate_rdm(small_scenario.replace(targets=(_target(7, 0.0),)), Waveform.zc(ZcParams(101, 7)))

    report = detect(rdm, 0.0, 0.0, max_lag=detection_lag_window(small_scenario))

    assert report.cells_tested == 21
    assert detection_lag_window(small_scenario) == 20
    with pytest.raises(ParameterError):
        detect(rdm, -1.0, 0.0)


def test_range_only_matching_ignores_velocity(small_scenario):
    target = _target(7, 0.2 / 101)
    scenario = small_scenario.replace(targets=(target,))
    rdm = simulate_rdm(scenario, Waveform.zc(ZcParams(101, 7)))
    report = detect(rdm, 0.0, 0.0, max_lag=10)

    full = match_detections(report, [target], scenario)
    range_only = match_detections(report, [target], scenario, range_only=True)

    assert full.matched_targets == 0
    assert range_only.matched_targets == 1


def test_dzc_chain_is_doppler_immune():
    base = ZcParams(101, 7)
    waveform = Waveform.dzc(base)
    echo = apply_doppler_delay(waveform.transmitted, 7, 0.4 / 101)

    profile = dzc_receive_chain(echo, base)

    assert profile.peak_index == 7
    # only the wrapped first sample carries a Doppler residue
    assert profile.magnitudes[7] == pytest.approx(101, abs=2.0)


def test_dzc_block_decode_uses_previous_row(small_scenario):
    base = ZcParams(101, 7)
    waveform = Waveform.dzc(base)
    scenario = small_scenario.replace(targets=(_target(6, 0.1 / 101),))
    block = synthesize_repetitions(scenario, waveform.transmitted)

    profiles = waveform.range_profiles(block)

    assert np.allclose(profiles[1], dzc_receive_chain(block[1], base, previous=block[0, -1]).values)
    assert np.allclose(profiles[0], waveform.range_profile(block[0]).values)


def test_target_draws_are_shared(desk_scenario):
    a = draw_targets(desk_scenario, 5)
    b = draw_targets(desk_scenario, 5)

    assert a == b
    assert len(a) == 4
    assert all(0 <= t.d <= desk_scenario.physical.D_r and abs(t.u) <= desk_scenario.physical.u_max for t in a)
    assert draw_targets(desk_scenario, 6) != a


def test_roc_sweep_is_reproducible(small_scenario):
    scenario = small_scenario.replace(snr_db=0.0, num_targets=2)
    waveform = Waveform.zc(ZcParams(101, 7))
    gammas = [0.5, 2.0, 10.0, 100.0]

    first = roc_sweep(scenario, waveform, gammas, trials=3, workers=1)
    second = roc_sweep(scenario, waveform, gammas, trials=3, workers=3)

    assert np.array_equal(first.false_alarm_rates, second.false_alarm_rates)
    assert np.array_equal(first.detection_rates, second.detection_rates)
    assert np.all(np.diff(first.false_alarm_rates) <= 0)
    assert np.all(np.diff(first.detection_rates) <= 0)
    assert first.metadata["shared_target_draws"]


def test_roc_sweep_defaults_for_dzc(small_scenario):
    curve = roc_sweep(small_scenario.replace(num_targets=1), Waveform.dzc(ZcParams(101, 7)), [1.0], trials=1)

    assert curve.metadata["v_limit"] == 0.0
    assert curve.metadata["range_only"] is True


@pytest.mark.parametrize(
    "gammas, trials",
    [([], 1), ([2.0, 1.0], 1), ([1.0, 1.0], 1), ([1.0], 0)],
)
def test_roc_sweep_validation(small_scenario, gammas, trials):
    with pytest.raises(ParameterError):
        roc_sweep(small_scenario, Waveform.zc(ZcParams(101, 7)), gammas, trials)


def test_designed_root_raises_fewer_false_alarms(desk_scenario):
    """Doppler sidelobes of p=1 fire at thresholds the designed root stays below."""
    gammas = [10.0, 30.0]
    baseline = roc_sweep(desk_scenario, Waveform.zc(ZcParams(1019, 1)), gammas, trials=4)
    designed = roc_sweep(desk_scenario, Waveform.zc(ZcParams(1019, 21)), gammas, trials=4)

    assert designed.false_alarm_rates[0] < baseline.false_alarm_rates[0]


def test_cell_statistic_uses_mean_of_all_other_cells(rng):
    """θ is the plain mean of |E|² over every cell but the one under test, window or not."""
    values = rng.normal(size=(9, 8)) + 1j * rng.normal(size=(9, 8))
    power = np.abs(values) ** 2
    literal = np.empty_like(power)
    for n in range(9):
        for q in range(8):
            others = np.ones(power.shape, dtype=bool)
            others[n, q] = False
            literal[n, q] = power[n, q] / power[others].mean()

    lags, bins, stat = _cell_statistics(Rdm(values), 1.0, None)
    window_lags, window_bins, window_stat = _cell_statistics(Rdm(values), doppler_of_bin(1, 9, 8), 3)

    assert np.allclose(stat, literal[np.ix_(lags, bins)], rtol=1e-9, atol=0)
    assert list(window_lags) == [0, 1, 2, 3]
    assert list(window_bins) == [0, 1, 7]
    assert np.allclose(window_stat, literal[np.ix_(window_lags, window_bins)], rtol=1e-9, atol=0)


def test_detect_never_reports_bins_beyond_the_doppler_limit(small_scenario):
    K0 = small_scenario.K0
    fast = _target(7, 6 / (101 * K0), 10.0)
    slow = _target(12, 1 / (101 * K0))
    rdm = simulate_rdm(small_scenario.replace(targets=(fast, slow)), Waveform.zc(ZcParams(101, 7)))
    v_limit = 2 / (101 * K0)

    report = detect(rdm, 0.0, v_limit)
    cells = [(n, q) for n, q, _ in report.detections]

    assert rdm.argmax() == (7, 6)
    assert np.all(np.abs(doppler_of_bin(report.bins, 101, K0)) <= v_limit * (1 + 1e-12))
    assert (7, 6) not in cells
    assert (12, 1) in cells


def test_dzc_detections_stay_in_the_zero_doppler_bin(small_scenario):
    scenario = small_scenario.replace(snr_db=0.0, targets=(_target(6, 0.25 / 101), _target(15, -0.2 / 101)))
    rdm = simulate_rdm(scenario, Waveform.dzc(ZcParams(101, 7)))

    report = detect(rdm, 0.0, 0.0)

    assert rdm.argmax()[1] == 0
    assert len(report) > 0
    assert set(report.bins.tolist()) == {0}


def test_false_alarm_rate_counts_every_tested_cell(small_scenario):
    """Unmatched firing cells over all tested cells, the cells matching a target included."""
    scenario = small_scenario.replace(snr_db=0.0, num_targets=2)
    waveform = Waveform.zc(ZcParams(101, 7))
    gammas = [0.0, 2.0]
    targets = draw_targets(scenario, 0)
    rdm = simulate_rdm(scenario, waveform, 0, targets)
    v_limit = max_normalized_doppler(scenario.physical)

    curve = roc_sweep(scenario, waveform, gammas, trials=1)

    for gamma, rate in zip(gammas, curve.false_alarm_rates):
        scored = match_detections(detect(rdm, gamma, v_limit, detection_lag_window(scenario)), targets, scenario)
        assert scored.cells_tested == 21 * 19
        assert rate == pytest.approx(scored.false_cells / scored.cells_tested)
    assert curve.false_alarm_rates[0] < 1.0


@pytest.mark.slow
def test_designed_root_dominates_at_desk_scale(desk_scenario):
    """
    50 trials at -5 dB on shared draws. Against p=1 the designed root fires
    fewer false cells at equal detection; against the differential chain it
    keeps detecting at thresholds the decoded peak never reaches.
    """
    gammas = [30.0, 1000.0]
    designed = roc_sweep(desk_scenario, Waveform.zc(ZcParams(1019, 21)), gammas, trials=50)
    baseline = roc_sweep(desk_scenario, Waveform.zc(ZcParams(1019, 1)), gammas, trials=50)
    differential = roc_sweep(desk_scenario, Waveform.dzc(ZcParams(1019, 21)), gammas, trials=50)

    assert designed.false_alarm_rates[0] < baseline.false_alarm_rates[0]
    assert designed.detection_rates[0] >= baseline.detection_rates[0]
    assert designed.detection_rates[0] >= 0.98
    assert designed.detection_rates[1] >= 0.9
    assert designed.detection_rates[1] > differential.detection_rates[1] + 0.5


def test_designed_cazac_fires_fewer_sidelobe_cells(full_req):
    """
    Noiseless target at +v̄ and lag 0: at a threshold between the two largest
    sidelobe cells the searched (phi, a) raises no false cell the average
    CAZAC does not, and both detect the target.
    """
    req = full_req.rescaled(9081, 909)
    designed = cazac_search(101, 3, req)
    average, _ = average_parameter_cazac(101, 3, req, 100, np.random.default_rng(3))
    target = Target(d=0.0, u=req.u_max)
    scenario = Scenario(targets=(target,), snr_db=float("inf"), N=909, K=16, omega=4, seed=1, physical=req)
    v_limit = 4.5 / (909 * scenario.K0)
    window = int(np.ceil(roi_lag_bound(req))) - 1
    phi, a = designed.parameter
    rdms = [simulate_rdm(scenario, Waveform.cazac(params)) for params in (CazacParams(r=101, m=3, phi=phi, a=a), average)]

    sidelobes = []
    for rdm in rdms:
        report = detect(rdm, 0.0, v_limit, max_lag=window)
        sidelobes.append(report.statistics[report.lags > 0].max())
    gamma = float(np.sqrt(sidelobes[0] * sidelobes[1]))
    scored = [match_detections(detect(rdm, gamma, v_limit, max_lag=window), [target], scenario) for rdm in rdms]

    assert sidelobes[0] < sidelobes[1]
    assert scored[0].false_cells < scored[1].false_cells
    assert scored[0].matched_targets == scored[1].matched_targets == 1
