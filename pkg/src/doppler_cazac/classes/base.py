from dataclasses import dataclass, field
from math import gcd, inf, isfinite, log10
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.numbertheory import is_square_free
from .defaults import SPEED_OF_LIGHT
from .exceptions import ParameterError

__all__ = [
    "amplitude_db",
    "power_db",
    "db_to_amplitude",
    "as_samples",
    "ComplexSequence",
    "ZcParams",
    "CazacParams",
    "CazacVerification",
    "RangeProfile",
    "RoI",
    "DopplerSpec",
    "PslrMeasurement",
    "ResidueTable",
    "SensingRequirements",
    "DesignResult",
    "FeasibleRange",
    "Target",
    "Scenario",
    "Rdm",
    "DetectionReport",
    "RocCurve",
]


def _frozen_array(values: Any, dtype=np.complex128) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def amplitude_db(ratio: float) -> float:
    """20·log10 of an amplitude ratio; -inf for zero."""
    return 20.0 * log10(ratio) if ratio > 0 else -inf


def power_db(ratio: float) -> float:
    return 10.0 * log10(ratio) if ratio > 0 else -inf


def db_to_amplitude(db: float) -> float:
    return 10.0 ** (db / 20.0)


@dataclass(frozen=True, eq=False)
class ComplexSequence:
    """
    Immutable block of complex samples plus the parameters that generated it.

    Attributes:
        samples (np.ndarray): Read-only complex128 samples
        kind (str): Generator tag ("zc", "cazac", "dzc" or "raw")
        provenance (dict): Generating parameters, e.g. {"N": 35537, "p": 21}
    """

    samples: np.ndarray
    kind: str = "raw"
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_array(self.samples))
        if self.samples.ndim != 1:
            raise ParameterError("Sequence samples must be one-dimensional", "ComplexSequence")

    @property
    def length(self) -> int:
        return int(self.samples.size)

    def __len__(self) -> int:
        return self.length

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)

    def __str__(self) -> str:
        return f"ComplexSequence(kind={self.kind}, length={self.length}, provenance={self.provenance})"


@dataclass(frozen=True)
class ZcParams:
    """Zadoff-Chu length N (odd) and root index p, 0 < p < N, gcd(p, N) = 1."""

    N: int
    p: int

    def __post_init__(self):
        if self.N < 1 or self.N % 2 == 0:
            raise ParameterError(f"ZC length must be a positive odd integer, got N={self.N}", "ZcParams")
        if not 0 < self.p < self.N:
            raise ParameterError(f"Root index p={self.p} outside (0, {self.N})", "ZcParams")
        if gcd(self.p, self.N) != 1:
            raise ParameterError(
                f"Root index p={self.p} shares a factor with N={self.N}",
                "ZcParams",
                details=f"gcd(p, N) = {gcd(self.p, self.N)}",
            )


@dataclass(frozen=True)
class CazacParams:
    """
    Parameters of the unified CAZAC construction of length N = r·m².

    The phase index mapping is either the restricted linear family
    varphi(γ) = <a·m·γ + γ> mod r·m (slope ``a``) or an explicit ``varphi``
    table whose residues mod m are a permutation of Z_m.

    Attributes:
        r (int): Positive integer
        m (int): Square-free positive integer
        phi (int): Constant quadratic coefficient, gcd(phi, r) = 1
        a (int): Slope of the restricted mapping, 0 <= a <= floor(r/m)
        psi (tuple, optional): m real phase offsets, zeros when omitted
        varphi (tuple, optional): Explicit m-entry mapping table, overrides ``a``
    """

    r: int
    m: int
    phi: int
    a: int = 0
    psi: Optional[Tuple[float, ...]] = None
    varphi: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.r < 1:
            raise ParameterError(f"r must be positive, got {self.r}", "CazacParams")
        if not is_square_free(self.m):
            raise ParameterError(f"m={self.m} is not square-free", "CazacParams")
        if gcd(self.phi, self.r) != 1:
            raise ParameterError(
                f"phi={self.phi} shares a factor with r={self.r}",
                "CazacParams",
                details=f"gcd(phi, r) = {gcd(self.phi, self.r)}",
            )
        if not 0 <= self.a <= self.r // self.m:
            raise ParameterError(f"a={self.a} outside [0, {self.r // self.m}]", "CazacParams")
        if self.psi is not None:
            object.__setattr__(self, "psi", tuple(float(v) for v in self.psi))
            if len(self.psi) != self.m:
                raise ParameterError(f"psi needs {self.m} entries, got {len(self.psi)}", "CazacParams")
        if self.varphi is not None:
            table = tuple(int(v) % (self.r * self.m) for v in self.varphi)
            object.__setattr__(self, "varphi", table)
            if len(table) != self.m:
                raise ParameterError(f"varphi needs {self.m} entries, got {len(table)}", "CazacParams")
            if sorted(v % self.m for v in table) != list(range(self.m)):
                raise ParameterError(
                    "varphi residues mod m are not a permutation of Z_m",
                    "CazacParams",
                    details=f"varphi={list(table)}, m={self.m}",
                )

    @property
    def N(self) -> int:
        return self.r * self.m * self.m

    @property
    def c_r(self) -> float:
        return 1.0 if self.r % 2 == 1 else 0.5

    @property
    def varphi_table(self) -> np.ndarray:
        if self.varphi is not None:
            return np.array(self.varphi, dtype=np.int64)
        gamma = np.arange(self.m, dtype=np.int64)
        return (self.a * self.m * gamma + gamma) % (self.r * self.m)

    @property
    def psi_table(self) -> np.ndarray:
        if self.psi is None:
            return np.zeros(self.m)
        return np.array(self.psi, dtype=float)

    def describe(self) -> Dict[str, Any]:
        res: Dict[str, Any] = {"r": self.r, "m": self.m, "phi": self.phi, "N": self.N}
        if self.varphi is None:
            res["a"] = self.a
        else:
            res["varphi"] = list(self.varphi)
        return res


@dataclass(frozen=True)
class CazacVerification:
    constant_amplitude: bool
    zero_autocorrelation: bool
    max_amplitude_deviation: float
    max_sidelobe: float
    tolerance: float

    @property
    def is_cazac(self) -> bool:
        return self.constant_amplitude and self.zero_autocorrelation


@dataclass(frozen=True, eq=False)
class RangeProfile:
    """Circular correlation output, one complex value per lag."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))

    @property
    def length(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.length

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def peak_index(self) -> int:
        # np.argmax returns the first maximum: ties go to the smallest lag
        return int(np.argmax(self.magnitudes))


@dataclass(frozen=True)
class RoI:
    """Peak-relative lag window {n : 0 < n < n_max}."""

    n_max: float

    def __post_init__(self):
        if not (self.n_max > 0 and isfinite(self.n_max)):
            raise ParameterError(f"RoI bound must be positive and finite, got {self.n_max}", "RoI")

    def offsets(self) -> np.ndarray:
        """Integer lags 1 .. ceil(n_max) - 1."""
        return np.arange(1, int(np.ceil(self.n_max)), dtype=np.int64)

    def lags(self, N: int, peak: int = 0) -> np.ndarray:
        if self.n_max > N:
            raise ParameterError(f"RoI bound {self.n_max} exceeds sequence length {N}", "RoI")
        return (peak + self.offsets()) % N


@dataclass(frozen=True)
class DopplerSpec:
    """Normalized Doppler shift per sample, v = 2·u·f_c·T_s / c."""

    v: float

    @classmethod
    def from_velocity(cls, u: float, f_c: float, T_s: float, c: float = SPEED_OF_LIGHT) -> "DopplerSpec":
        return cls(2.0 * u * f_c * T_s / c)

    def check(self, N: int, operation: str = "DopplerSpec"):
        from .exceptions import AssumptionError

        if abs(self.v) * N >= 1:
            raise AssumptionError(
                f"|v|·N = {abs(self.v) * N:.4f} violates the |v|·N < 1 assumption",
                operation,
                details=f"v={self.v}, N={N}",
            )


@dataclass(frozen=True)
class PslrMeasurement:
    linear: float
    saturated: bool
    peak_index: int
    sidelobe_index: int
    peak_magnitude: float
    sidelobe_magnitude: float

    @property
    def db(self) -> float:
        return amplitude_db(self.linear)


@dataclass(frozen=True)
class ResidueTable:
    """
    Table of |<p·k>| (centered mod N) against k = |n - τ| = 0..(N-1)/2.

    Attributes:
        N (int): Odd modulus
        p (int): Root index
        A (int): floor((N-1) / (2p))
        B (int): (N-1)/2 - A·p
        magnitudes (np.ndarray): |<p·k>| for k = 0..(N-1)/2
    """

    N: int
    p: int
    A: int
    B: int
    magnitudes: np.ndarray

    def __getitem__(self, k: int) -> int:
        return int(self.magnitudes[k])

    def __len__(self) -> int:
        return int(self.magnitudes.size)


@dataclass(frozen=True)
class SensingRequirements:
    """
    Physical setup driving the design.

    Attributes:
        f_c (float): Carrier frequency (Hz)
        T_s (float): Sampling period (s)
        D_r (float): Sensing range (m)
        u_max (float): Speed limit (m/s)
        P_r (float): Required PSLR, linear amplitude ratio
        c (float): Propagation speed (m/s)
    """

    f_c: float
    T_s: float
    D_r: float
    u_max: float
    P_r: float = 10.0
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("f_c", "T_s", "D_r", "P_r", "c"):
            value = getattr(self, name)
            if not (value > 0 and isfinite(value)):
                raise ParameterError(f"{name} must be strictly positive, got {value}", "SensingRequirements")
        if not (self.u_max >= 0 and isfinite(self.u_max)):
            raise ParameterError(f"u_max must be non-negative, got {self.u_max}", "SensingRequirements")

    @classmethod
    def from_db(cls, f_c: float, T_s: float, D_r: float, u_max: float, pr_db: float, c: float = SPEED_OF_LIGHT):
        return cls(f_c=f_c, T_s=T_s, D_r=D_r, u_max=u_max, P_r=db_to_amplitude(pr_db), c=c)

    @property
    def P_r_db(self) -> float:
        return amplitude_db(self.P_r)

    def replace(self, **changes: Any) -> "SensingRequirements":
        values = {
            "f_c": self.f_c,
            "T_s": self.T_s,
            "D_r": self.D_r,
            "u_max": self.u_max,
            "P_r": self.P_r,
            "c": self.c,
        }
        values.update(changes)
        return SensingRequirements(**values)

    def rescaled(self, n_from: int, n_to: int) -> "SensingRequirements":
        """Scale T_s so v̄·N and RoI/N are preserved when N changes."""
        return self.replace(T_s=self.T_s * n_from / n_to)


@dataclass(frozen=True)
class DesignResult:
    """
    Outcome of a design query.

    Attributes:
        parameter: p for ZC, (phi, a) for CAZAC, None when infeasible
        achieved_pslr (float): Linear PSLR of the returned parameter
        roi_bound (float): RoI lag bound 2·D_r/(c·T_s)
        feasible (bool): Whether a parameter was found
        diagnostics (str): Human readable notes
        evaluations (int): Number of candidates evaluated
        grid (np.ndarray, optional): P(phi, a) grid for CAZAC searches
    """

    parameter: Union[int, Tuple[int, int], None]
    achieved_pslr: float
    roi_bound: float
    feasible: bool
    diagnostics: str = ""
    evaluations: int = 0
    grid: Optional[np.ndarray] = None
    grid_axes: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None

    @property
    def achieved_pslr_db(self) -> float:
        return amplitude_db(self.achieved_pslr)

    def to_dict(self) -> Dict[str, Any]:
        parameter: Any = self.parameter
        if isinstance(parameter, tuple):
            parameter = {"phi": parameter[0], "a": parameter[1]}
        elif parameter is not None:
            parameter = {"p": parameter}
        return {
            "parameter": parameter,
            "achieved_pslr_db": self.achieved_pslr_db if self.feasible else None,
            "roi_bound": self.roi_bound,
            "feasible": self.feasible,
            "evaluations": self.evaluations,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class FeasibleRange:
    roots: Tuple[int, ...]
    lower_bound: float
    upper_bound: float
    diagnostics: str = ""

    @property
    def feasible(self) -> bool:
        return len(self.roots) > 0

    def __contains__(self, p: int) -> bool:
        return p in self.roots

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class Target:
    """Point target: distance d (m), radial velocity u (m/s), complex gain h."""

    d: float
    u: float
    h: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.d < 0:
            raise ParameterError(f"Target distance must be non-negative, got {self.d}", "Target")


@dataclass(frozen=True)
class Scenario:
    """
    One simulation instance.

    Attributes:
        targets (tuple): Fixed targets (used by echo synthesis and RDM snapshots)
        snr_db (float): Per-target receive SNR in dB, inf for a noiseless run
        N (int): Sequence length
        K (int): Repetition count
        omega (int): FFT factor, K0 = omega·K
        seed (int): 64-bit RNG seed
        physical (SensingRequirements): Physical setup
        num_targets (int): Targets drawn per trial by ROC sweeps
    """

    targets: Tuple[Target, ...]
    snr_db: float
    N: int
    K: int
    omega: int
    seed: int
    physical: SensingRequirements
    num_targets: int = 4

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.N < 1 or self.K < 1 or self.omega < 1:
            raise ParameterError("N, K and omega must be >= 1", "Scenario", details=f"N={self.N}, K={self.K}, omega={self.omega}")
        if self.num_targets < 0:
            raise ParameterError("num_targets must be >= 0", "Scenario")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must fit in 64 bits, got {self.seed}", "Scenario")
        for target in self.targets:
            if abs(target.u) > self.physical.u_max:
                raise ParameterError(
                    f"Target velocity {target.u} m/s exceeds the speed limit {self.physical.u_max} m/s",
                    "Scenario",
                )

    @property
    def K0(self) -> int:
        return self.omega * self.K

    @property
    def noise_variance(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)

    @property
    def noise_std(self) -> float:
        return float(np.sqrt(self.noise_variance))

    def replace(self, **changes: Any) -> "Scenario":
        values = {
            "targets": self.targets,
            "snr_db": self.snr_db,
            "N": self.N,
            "K": self.K,
            "omega": self.omega,
            "seed": self.seed,
            "physical": self.physical,
            "num_targets": self.num_targets,
        }
        values.update(changes)
        return Scenario(**values)


@dataclass(frozen=True, eq=False)
class Rdm:
    """Range-Doppler map, shape N x K0 (lag x Doppler bin)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.values.ndim != 2:
            raise ParameterError("RDM must be two-dimensional", "Rdm")

    @property
    def N(self) -> int:
        return int(self.values.shape[0])

    @property
    def K0(self) -> int:
        return int(self.values.shape[1])

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def argmax(self) -> Tuple[int, int]:
        n, q = np.unravel_index(int(np.argmax(self.power)), self.values.shape)
        return int(n), int(q)


@dataclass(frozen=True, eq=False)
class DetectionReport:
    """
    Cells declared H1 plus matching counters.

    ``lags``, ``bins`` and ``statistics`` are parallel arrays; ``detections``
    exposes them as (n, q, statistic) tuples.
    """

    lags: np.ndarray
    bins: np.ndarray
    statistics: np.ndarray
    cells_tested: int
    matched_targets: int = 0
    false_cells: int = 0
    num_targets: int = 0

    @property
    def detections(self) -> List[Tuple[int, int, float]]:
        return [(int(n), int(q), float(s)) for n, q, s in zip(self.lags, self.bins, self.statistics)]

    def __len__(self) -> int:
        return int(self.lags.size)

    @property
    def detection_rate(self) -> float:
        return self.matched_targets / self.num_targets if self.num_targets else 0.0

    @property
    def false_alarm_rate(self) -> float:
        return self.false_cells / self.cells_tested if self.cells_tested else 0.0


@dataclass(frozen=True, eq=False)
class RocCurve:
    gammas: np.ndarray
    false_alarm_rates: np.ndarray
    detection_rates: np.ndarray
    trials: int
    seed: int
    label: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def points(self) -> List[Tuple[float, float]]:
        return [(float(fa), float(dr)) for fa, dr in zip(self.false_alarm_rates, self.detection_rates)]

    def __len__(self) -> int:
        return int(self.gammas.size)

    def false_alarm_at(self, detection_rate: float) -> float:
        """Smallest false alarm rate among points reaching the given detection rate."""
        ok = self.detection_rates >= detection_rate
        if not np.any(ok):
            return inf
        return float(np.min(self.false_alarm_rates[ok]))


def as_samples(seq: Union[ComplexSequence, Sequence[complex], np.ndarray]) -> np.ndarray:
    if isinstance(seq, ComplexSequence):
        return seq.samples
    if isinstance(seq, RangeProfile):
        return seq.values
    return np.asarray(seq, dtype=np.complex128)
