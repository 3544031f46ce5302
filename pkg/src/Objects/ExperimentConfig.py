from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from src import settings

from .Errors import ContractViolation


class ExperimentKind(Enum):
    FMM_ACCURACY = "fmm_accuracy"
    CMM_ACCURACY = "cmm_accuracy"
    CMM_SPEED = "cmm_speed"
    HORNER = "horner"
    UNITARY = "unitary"
    CNN = "cnn"
    SCALAR_BOUNDS = "scalar_bounds"
    GAUSS_ASYMMETRY = "gauss_asymmetry"


FMM_ALGOS = ("conventional", "strassen", "winograd")
CMM_ALGOS = ("regular", "gauss", "new")
FMM_DISTRIBUTIONS = ("uniform", "normal", "complex")
BACKENDS = ("conventional", "strassen", "winograd")

# experiments whose inputs come from the conditioned generator
_CONDITIONED = {ExperimentKind.CMM_ACCURACY, ExperimentKind.HORNER, ExperimentKind.UNITARY, ExperimentKind.CNN}
_ORACLE = _CONDITIONED | {ExperimentKind.FMM_ACCURACY, ExperimentKind.GAUSS_ASYMMETRY}


def default_kappas() -> Tuple[int, ...]:
    return tuple(2 ** e for e in settings.DEFAULT_KAPPA_EXPONENTS)


def _default_algos(kind: ExperimentKind) -> Tuple[str, ...]:
    return FMM_ALGOS if kind is ExperimentKind.FMM_ACCURACY else CMM_ALGOS


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of one experiment run; validated on construction"""

    experiment: ExperimentKind
    n: int = 64
    trials: int = settings.DEFAULT_TRIALS
    kappa_list: Tuple[int, ...] = field(default_factory=default_kappas)
    seed: int = settings.DEFAULT_SEED
    algos: Tuple[str, ...] = ()
    cutoff: int = settings.DEFAULT_CUTOFF
    backend: str = "conventional"
    output: Optional[str] = None
    fmt: str = "csv"
    # fmm_accuracy
    dist: str = "uniform"
    # horner / cnn
    degree: int = settings.HORNER_DEGREE
    depth: int = settings.CNN_DEPTH
    batch: int = settings.CNN_SHAPES[0][0]
    # inputs
    normalize: bool = False
    timing_only: bool = False
    identity_transform: bool = False

    def __post_init__(self):
        if isinstance(self.experiment, str):
            try:
                object.__setattr__(self, "experiment", ExperimentKind(self.experiment))
            except ValueError:
                raise ContractViolation(f"unknown experiment '{self.experiment}'") from None
        if not self.algos:
            object.__setattr__(self, "algos", _default_algos(self.experiment))
        object.__setattr__(self, "algos", tuple(self.algos))
        object.__setattr__(self, "kappa_list", tuple(int(k) for k in self.kappa_list))
        self._validate()

    def _validate(self) -> None:
        if self.trials < 1:
            raise ContractViolation(f"trials must be >= 1, got {self.trials}")
        if self.n < 1:
            raise ContractViolation(f"n must be >= 1, got {self.n}")
        if self.cutoff < 1:
            raise ContractViolation(f"cutoff must be >= 1, got {self.cutoff}")
        if self.seed < 0:
            raise ContractViolation(f"seed must be nonnegative, got {self.seed}")
        if self.backend not in BACKENDS:
            raise ContractViolation(f"unknown backend '{self.backend}'; valid: {list(BACKENDS)}")
        if self.fmt not in ("csv", "json"):
            raise ContractViolation(f"format must be csv or json, got {self.fmt}")
        valid = FMM_ALGOS if self.experiment is ExperimentKind.FMM_ACCURACY else CMM_ALGOS
        unknown = [a for a in self.algos if a not in valid]
        if unknown:
            raise ContractViolation(f"unknown algorithm(s) {unknown} for {self.experiment.value}; valid: {list(valid)}")
        if self.experiment is ExperimentKind.FMM_ACCURACY and self.dist not in FMM_DISTRIBUTIONS:
            raise ContractViolation(f"unknown input distribution '{self.dist}'")
        if self.experiment in _CONDITIONED:
            if self.n < 2 or self.n & (self.n - 1):
                raise ContractViolation(f"{self.experiment.value} needs n a power of 2, got {self.n}")
            if not self.kappa_list or min(self.kappa_list) < 2:
                raise ContractViolation(f"kappa values must be integers >= 2, got {self.kappa_list}")
        if self.degree < 0 or self.depth < 1 or self.batch < 1:
            raise ContractViolation("degree must be >= 0, depth and batch >= 1")
        if self.timing_only and self.experiment not in (ExperimentKind.HORNER, ExperimentKind.UNITARY):
            raise ContractViolation("timing-only mode applies to horner and unitary")

    @property
    def needs_oracle(self) -> bool:
        return self.experiment in _ORACLE and not self.timing_only

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["experiment"] = self.experiment.value
        return out


@dataclass
class ExperimentRecord:
    experiment: str
    algorithm: str
    n: int
    kappa: Optional[int]
    seed: int
    rel_error: Optional[float]
    wall_time_s: float
    bound: Optional[float] = None
    # JSON-only fields
    flagged: bool = False
    part: Optional[str] = None
    extras: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.rel_error is not None and not self.rel_error >= 0:
            raise ContractViolation(f"rel_error must be >= 0, got {self.rel_error}")
        if not self.wall_time_s >= 0:
            raise ContractViolation(f"wall_time_s must be >= 0, got {self.wall_time_s}")

    @property
    def within_bound(self) -> Optional[bool]:
        if self.bound is None or self.rel_error is None:
            return None
        return self.rel_error <= self.bound

    def to_row(self) -> Dict:
        """CSV row in settings.CSV_COLUMNS order"""
        return {col: getattr(self, col) for col in settings.CSV_COLUMNS}

    def to_dict(self) -> Dict:
        return asdict(self)
