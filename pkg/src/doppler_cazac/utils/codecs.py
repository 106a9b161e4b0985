import csv
import os
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..classes.base import ComplexSequence, RangeProfile, Rdm, RocCurve, amplitude_db
from ..classes.defaults import RDM_MAGIC, SEQUENCE_KIND_TAGS, SEQUENCE_MAGIC
from ..classes.exceptions import FormatError
from .logger import log

PathLike = Union[str, "os.PathLike[str]"]

HEADER_DTYPE = np.dtype([("magic", "S4"), ("a", "<u4"), ("b", "<u4"), ("reserved", "<u4")])
KIND_BY_TAG = {tag: kind for kind, tag in SEQUENCE_KIND_TAGS.items()}

SEQUENCE_CSV_FIELDS = ["index", "re", "im"]
PROFILE_CSV_FIELDS = ["lag", "magnitude", "magnitude_db"]
ROC_CSV_FIELDS = ["gamma", "false_alarm_rate", "detection_rate", "trials", "seed"]
RDM_CSV_FIELDS = ["lag", "bin", "magnitude"]


def _float(value: float) -> str:
    # repr() of a float is the shortest string that parses back bit-exactly
    return repr(float(value))


def _ensure_parent(path: PathLike):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_rows(path: PathLike, fieldnames: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    """
    Write dict rows to a CSV file with a fixed column order.

    Args:
        path: Output file
        fieldnames: Column order
        rows: Row dicts, floats are written with repr() precision

    Returns:
        The path written
    """
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _float(v) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    log.trace(f"Wrote {len(rows)} rows to {path}")
    return os.fspath(path)


def read_rows(path: PathLike) -> Tuple[List[str], List[Dict[str, str]]]:
    """Read a CSV table, returning its header and rows as strings."""
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            rows = list(reader)
            header = list(reader.fieldnames or [])
    except (OSError, csv.Error) as e:
        raise FormatError(f"Unable to read CSV table {path}", "read_rows", details=str(e))
    if not header:
        raise FormatError(f"CSV table {path} has no header", "read_rows")
    return header, rows


def _require_columns(header: List[str], expected: Sequence[str], path: PathLike, operation: str):
    missing = [col for col in expected if col not in header]
    if missing:
        raise FormatError(
            f"CSV table {path} is missing columns {missing}",
            operation,
            details=f"header={header}",
        )


def write_sequence_csv(seq: ComplexSequence, path: PathLike) -> str:
    rows = [{"index": i, "re": float(x.real), "im": float(x.imag)} for i, x in enumerate(seq.samples)]
    return write_rows(path, SEQUENCE_CSV_FIELDS, rows)


def read_sequence_csv(path: PathLike, kind: str = "raw") -> ComplexSequence:
    header, rows = read_rows(path)
    _require_columns(header, SEQUENCE_CSV_FIELDS, path, "read_sequence_csv")
    samples = np.empty(len(rows), dtype=np.complex128)
    try:
        for i, row in enumerate(rows):
            if int(row["index"]) != i:
                raise FormatError(f"Row {i} carries index {row['index']}", "read_sequence_csv")
            samples[i] = complex(float(row["re"]), float(row["im"]))
    except (TypeError, ValueError) as e:
        raise FormatError(f"Malformed sequence CSV {path}", "read_sequence_csv", details=str(e))
    return ComplexSequence(samples, kind=kind, provenance={"source": os.fspath(path)})


def encode_sequence(seq: ComplexSequence) -> bytes:
    """
    Pack a sequence as a 16-byte header followed by interleaved re/im doubles.

    The header is magic "CAZ1", u32 length, u32 kind tag and a reserved u32;
    everything is little-endian.
    """
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = SEQUENCE_MAGIC
    header["a"] = seq.length
    header["b"] = SEQUENCE_KIND_TAGS.get(seq.kind, 0)
    body = np.ascontiguousarray(seq.samples).view(np.float64).astype("<f8")
    return header.tobytes() + body.tobytes()


def decode_sequence(data: bytes) -> ComplexSequence:
    if len(data) < HEADER_DTYPE.itemsize:
        raise FormatError("Sequence block shorter than its header", "decode_sequence")
    header = np.frombuffer(data[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != SEQUENCE_MAGIC:
        raise FormatError(f"Bad sequence magic {bytes(header['magic'])!r}", "decode_sequence")
    length = int(header["a"])
    body = data[HEADER_DTYPE.itemsize :]
    if len(body) != 16 * length:
        raise FormatError(
            f"Sequence block holds {len(body)} payload bytes, expected {16 * length}",
            "decode_sequence",
        )
    interleaved = np.frombuffer(body, dtype="<f8")
    samples = interleaved[0::2] + 1j * interleaved[1::2]
    return ComplexSequence(samples, kind=KIND_BY_TAG.get(int(header["b"]), "raw"))


def write_sequence_binary(seq: ComplexSequence, path: PathLike) -> str:
    _ensure_parent(path)
    with open(path, "wb") as f:
        f.write(encode_sequence(seq))
    return os.fspath(path)


def _read_bytes(path: PathLike, operation: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise FormatError(f"Unable to read {path}", operation, details=str(e))


def read_sequence_binary(path: PathLike) -> ComplexSequence:
    return decode_sequence(_read_bytes(path, "read_sequence_binary"))


def write_profile_csv(profile: RangeProfile, path: PathLike) -> str:
    magnitudes = profile.magnitudes
    peak = float(magnitudes.max()) if magnitudes.size else 0.0
    rows = []
    for lag, mag in enumerate(magnitudes):
        # dB relative to the profile peak; -inf rows are written as "-inf"
        rows.append({"lag": lag, "magnitude": float(mag), "magnitude_db": amplitude_db(mag / peak) if peak > 0 else -np.inf})
    return write_rows(path, PROFILE_CSV_FIELDS, rows)


def encode_rdm(rdm: Rdm) -> bytes:
    """Header "RDM1" + u32 N + u32 K0, then row-major little-endian complex doubles."""
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = RDM_MAGIC
    header["a"] = rdm.N
    header["b"] = rdm.K0
    body = np.ascontiguousarray(rdm.values).astype("<c16")
    return header.tobytes() + body.tobytes(order="C")


def decode_rdm(data: bytes) -> Rdm:
    if len(data) < HEADER_DTYPE.itemsize:
        raise FormatError("RDM block shorter than its header", "decode_rdm")
    header = np.frombuffer(data[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != RDM_MAGIC:
        raise FormatError(f"Bad RDM magic {bytes(header['magic'])!r}", "decode_rdm")
    N, K0 = int(header["a"]), int(header["b"])
    body = data[HEADER_DTYPE.itemsize :]
    if len(body) != 16 * N * K0:
        raise FormatError(f"RDM block holds {len(body)} payload bytes, expected {16 * N * K0}", "decode_rdm")
    return Rdm(np.frombuffer(body, dtype="<c16").reshape(N, K0))


def write_rdm_binary(rdm: Rdm, path: PathLike) -> str:
    _ensure_parent(path)
    with open(path, "wb") as f:
        f.write(encode_rdm(rdm))
    return os.fspath(path)


def read_rdm_binary(path: PathLike) -> Rdm:
    return decode_rdm(_read_bytes(path, "read_rdm_binary"))


def write_rdm_summary_csv(rdm: Rdm, path: PathLike, top: int = 64) -> str:
    """Magnitude summary: the ``top`` strongest cells, strongest first."""
    magnitudes = np.abs(rdm.values).ravel()
    top = min(top, magnitudes.size)
    # stable sort keeps row-major order among equal magnitudes
    order = np.argsort(-magnitudes, kind="stable")[:top]
    rows = [
        {"lag": int(i // rdm.K0), "bin": int(i % rdm.K0), "magnitude": float(magnitudes[i])}
        for i in order
    ]
    return write_rows(path, RDM_CSV_FIELDS, rows)


def write_roc_csv(curve: RocCurve, path: PathLike) -> str:
    rows = [
        {
            "gamma": float(g),
            "false_alarm_rate": float(fa),
            "detection_rate": float(dr),
            "trials": curve.trials,
            "seed": curve.seed,
        }
        for g, fa, dr in zip(curve.gammas, curve.false_alarm_rates, curve.detection_rates)
    ]
    return write_rows(path, ROC_CSV_FIELDS, rows)


def read_roc_csv(path: PathLike, label: str = "") -> RocCurve:
    header, rows = read_rows(path)
    _require_columns(header, ROC_CSV_FIELDS, path, "read_roc_csv")
    if not rows:
        raise FormatError(f"ROC table {path} is empty", "read_roc_csv")
    try:
        return RocCurve(
            gammas=np.array([float(r["gamma"]) for r in rows]),
            false_alarm_rates=np.array([float(r["false_alarm_rate"]) for r in rows]),
            detection_rates=np.array([float(r["detection_rate"]) for r in rows]),
            trials=int(rows[0]["trials"]),
            seed=int(rows[0]["seed"]),
            label=label,
        )
    except (TypeError, ValueError) as e:
        raise FormatError(f"Malformed ROC table {path}", "read_roc_csv", details=str(e))
