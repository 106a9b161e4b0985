import re

DB_REGEX = re.compile(r"^\s*(?P<value>[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?)\s*(?P<unit>dB)?\s*$")

SPEED_OF_LIGHT = 3.0e8

# Numerical tolerances
CAZAC_TOLERANCE = 1e-9
PSLR_CAP = 1e15
SATURATION_FLOOR = 1e-9

# Binary block headers
SEQUENCE_MAGIC = b"CAZ1"
RDM_MAGIC = b"RDM1"

SEQUENCE_KIND_TAGS = {
    "zc": 1,
    "cazac": 2,
    "dzc": 3,
    "raw": 0,
}

WAVEFORM_KINDS = ["zc", "cazac", "dzc"]

FULL_PRESET = {
    "f_c": 240e9,
    "T_s": 0.2e-9,
    "D_r": 50.0,
    "u_max": 20.0,
    "P_r_db": 20.0,
    "N": 35537,
    "K": 100,
    "omega": 4,
    "r": 1009,
    "m": 3,
    "p": 21,
    "num_targets": 4,
    "snr_db": -5.0,
    "cazac_phi": 181,
    "cazac_a": 120,
    "n_random": 10_000,
    "trials": 100,
}

DESK_PRESET = {
    "N": 1019,
    "K": 16,
    "r": 101,
    "m": 3,
    "trials": 20,
    "n_random": 100,
}

EXPERIMENT_IDS = [
    "feasible_region",
    "cazac_pslr",
    "pslr_vs_doppler",
    "roc",
    "cazac_roc",
    "fx_curve",
]

CONFIG_SCHEMA_VERSION = 1

EXIT_CODES = {
    "success": 0,
    "config": 2,
    "infeasible": 3,
    "runtime": 4,
}

OUTPUT_DIR_ENV = "DOPPLER_CAZAC_OUTPUT_DIR"
LOG_LEVEL_ENV = "DOPPLER_CAZAC_LOG_LEVEL"
DEFAULT_OUTPUT_DIR = "results"
