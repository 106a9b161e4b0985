import json

import pytest

from doppler_cazac import (
    DESK_PRESET,
    FULL_PRESET,
    ConfigError,
    ExperimentConfig,
    Scenario,
    default_output_dir,
    load_config,
    load_scenario,
    preset_config,
)


@pytest.fixture
def write_json(tmp_path):
    def write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
        return str(path)

    return write


def test_load_valid_config(write_json):
    path = write_json(
        {
            "experiment": "roc",
            "seed": 7,
            "requirements": {"D_r": 30.0},
            "sequence": {"N": 1019, "p": 21},
            "sweep": {"gamma": [1.0, 10.0, 100.0]},
            "trials": 3,
            "snr_db": None,
        }
    )

    config = load_config(path)

    assert config.experiment == "roc"
    assert config.requirements.D_r == 30.0
    assert config.requirements.u_max == FULL_PRESET["u_max"]
    assert config.sequence.p == 21
    assert config.snr == float("inf")
    assert config.echo()["sweep"]["gamma"] == [1.0, 10.0, 100.0]


def test_overrides_replace_file_values(write_json):
    path = write_json({"experiment": "roc", "seed": 7, "trials": 3})

    config = load_config(path, seed=11, trials=None, output_dir="out")

    assert config.seed == 11
    assert config.trials == 3
    assert config.resolved_output_dir() == "out"


@pytest.mark.parametrize(
    "data",
    [
        {"experiment": "roc", "seed": 1, "unknown": True},
        {"experiment": "roc"},
        {"experiment": "roc", "seed": -1},
        {"experiment": "roc", "seed": 1, "sequence": {"N": 1018}},
        {"experiment": "roc", "seed": 1, "sweep": {"gamma": [1.0, 3.0, 2.0]}},
        {"experiment": "roc", "seed": 1, "sweep": {"gamma": []}},
        {"experiment": "roc", "seed": 1, "schema_version": 2},
        {"experiment": "figure9", "seed": 1},
        {"experiment": "roc", "seed": 1, "requirements": {"T_s": 0.0}},
        {"experiment": "roc", "seed": 1, "trials": 0},
    ],
)
def test_invalid_configs(write_json, data):
    with pytest.raises(ConfigError):
        load_config(write_json(data))


def test_decreasing_sweep_is_accepted(write_json):
    config = load_config(write_json({"experiment": "roc", "seed": 1, "sweep": {"gamma": [3.0, 2.0, 1.0]}}))

    assert config.sweep.gamma == [3.0, 2.0, 1.0]


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_unreadable_config(write_json, text):
    with pytest.raises(ConfigError):
        load_config(write_json(text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="Unable to read"):
        load_config(str(tmp_path / "absent.json"))


def test_config_is_frozen():
    config = preset_config("fx_curve", 0)

    with pytest.raises(Exception):
        config.seed = 5  # type: ignore[misc]


def test_full_preset():
    config = preset_config("roc", 42)

    assert isinstance(config, ExperimentConfig)
    assert config.sequence.N == FULL_PRESET["N"]
    assert config.requirements.T_s == FULL_PRESET["T_s"]
    assert config.K == FULL_PRESET["K"]
    assert len(config.sweep.gamma) == 71
    assert config.snr_points() == [-5.0, -10.0]


def test_desk_preset_scales_sampling_period():
    zc = preset_config("roc", 42, "desk")
    cazac = preset_config("cazac_roc", 42, "desk")

    assert zc.sequence.N == DESK_PRESET["N"]
    assert zc.requirements.T_s == pytest.approx(FULL_PRESET["T_s"] * 35537 / 1019)
    assert cazac.requirements.T_s == pytest.approx(FULL_PRESET["T_s"] * 9081 / 909)
    assert zc.trials == DESK_PRESET["trials"]


def test_snr_points_fall_back_to_single_snr():
    noiseless = ExperimentConfig.model_validate({"experiment": "roc", "seed": 1, "snr_db": None})
    swept = ExperimentConfig.model_validate({"experiment": "roc", "seed": 1, "sweep": {"snr_db": [0.0, -5.0]}})

    assert noiseless.snr_points() == [float("inf")]
    assert swept.snr_points() == [0.0, -5.0]


def test_preset_overrides_merge_dicts():
    config = preset_config("roc", 1, "desk", sequence={"p": 5}, trials=2)

    assert config.sequence.N == DESK_PRESET["N"]
    assert config.sequence.p == 5
    assert config.trials == 2


@pytest.mark.parametrize("experiment, scale", [("figure9", "full"), ("roc", "huge")])
def test_preset_rejects_unknown(experiment, scale):
    with pytest.raises(ConfigError):
        preset_config(experiment, 1, scale)


def test_preset_rejects_bad_override():
    with pytest.raises(ConfigError):
        preset_config("roc", 1, trials=0)


def test_config_builds_scenario(desk_req):
    config = preset_config("roc", 9, "desk")

    scenario = config.scenario(1019, desk_req)

    assert isinstance(scenario, Scenario)
    assert (scenario.K0, scenario.seed, scenario.snr_db) == (64, 9, FULL_PRESET["snr_db"])


def test_load_scenario(write_json):
    path = write_json(
        {
            "N": 101,
            "K": 8,
            "seed": 3,
            "snr_db": 10.0,
            "targets": [{"d": 1.05, "u": 5.0}, {"d": 2.4, "u": -5.0, "h_re": 0.0, "h_im": 1.0}],
            "physical": {"f_c": 1e11, "T_s": 1e-9, "D_r": 3.0, "u_max": 10.0},
        },
        "scenario.json",
    )

    scenario = load_scenario(path).to_scenario()

    assert scenario.N == 101
    assert scenario.K0 == 8 * FULL_PRESET["omega"]
    assert scenario.num_targets == 2
    assert scenario.targets[1].h == 1j
    assert scenario.physical.u_max == 10.0


@pytest.mark.parametrize(
    "data",
    [
        {"N": 101, "K": 8},
        {"N": 101, "K": 8, "seed": 1, "targets": [{"d": -1.0, "u": 0.0}]},
        {"N": 101, "K": 8, "seed": 1, "extra": 0},
    ],
)
def test_invalid_scenarios(write_json, data):
    with pytest.raises(ConfigError):
        load_scenario(write_json(data, "scenario.json"))


def test_default_output_dir(monkeypatch):
    monkeypatch.delenv("DOPPLER_CAZAC_OUTPUT_DIR", raising=False)
    assert default_output_dir() == "results"

    monkeypatch.setenv("DOPPLER_CAZAC_OUTPUT_DIR", "/tmp/runs")
    assert default_output_dir() == "/tmp/runs"
