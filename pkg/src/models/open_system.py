"""
Open quantum system models
Physical specification of a monitored Lindblad system: Hamiltonian, jump channels, monitored alphabet
"""
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.config.analysis_config import TOL_HERMITIAN
from src.models.errors import ConfigError, DimensionError, UnknownSymbolError

EXACT = "exact"
FLOAT = "float"
FIELDS = (EXACT, FLOAT)

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class ChainSpec:
    """
    Boundary-driven spin chain parameters
    Energies are in units of the hopping amplitude unless `hopping` is set
    """
    length: int
    gamma: Number = 1
    kappa: Number = 0
    hopping: Number = 1

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ConfigError(f"Chain length must be a positive integer, got {self.length}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")

    @property
    def is_xx(self) -> bool:
        return self.kappa == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chain": "xx" if self.is_xx else "xy",
            "L": self.length,
            "gamma": str(self.gamma),
            "kappa": str(self.kappa),
            "hopping": str(self.hopping),
        }


@dataclass(frozen=True, eq=False)
class JumpChannel:
    """
    One dissipation channel: rate * D[operator]
    The effective jump operator is sqrt(rate) * operator
    """
    label: str
    operator: Any  # np.ndarray (float field) or ExactMatrix (exact field)
    rate: Number = 1

    def effective_operator(self) -> np.ndarray:
        """sqrt(rate) * operator as a complex array (float view)"""
        op = self.operator.to_numpy() if hasattr(self.operator, "to_numpy") else np.asarray(self.operator, dtype=complex)
        return np.sqrt(float(self.rate)) * op


@dataclass(frozen=True, eq=False)
class OpenSystemModel:
    """
    Monitored open system: H, ordered jump channels, monitored subset and scalar field

    Unmonitored channels still act in the Liouvillian but are absorbed in the
    no-jump generator.
    """
    dim: int
    hamiltonian: Any
    jumps: Tuple[JumpChannel, ...]
    monitored: Tuple[str, ...]
    field: str = FLOAT
    chain: Optional[ChainSpec] = None
    name: str = "custom"
    metadata: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ConfigError(f"Unknown field {self.field!r}; expected one of {FIELDS}")
        labels = [jump.label for jump in self.jumps]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"Jump labels must be unique, got {labels}")
        if not self.monitored:
            raise ConfigError("Monitored set must be nonempty")
        unknown = [k for k in self.monitored if k not in labels]
        if unknown:
            raise UnknownSymbolError(f"Monitored labels {unknown} are not jump channels {labels}")
        if len(set(self.monitored)) != len(self.monitored):
            raise ConfigError(f"Monitored labels repeat: {list(self.monitored)}")

        for name, op in [("hamiltonian", self.hamiltonian)] + [(j.label, j.operator) for j in self.jumps]:
            if tuple(op.shape) != (self.dim, self.dim):
                raise DimensionError(f"Operator {name} has shape {tuple(op.shape)}, expected {(self.dim, self.dim)}")

        if self.is_exact:
            if not self.hamiltonian.is_hermitian():
                raise ConfigError("Hamiltonian is not Hermitian (exact check)")
        else:
            h = np.asarray(self.hamiltonian, dtype=complex)
            deviation = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
            if deviation > TOL_HERMITIAN:
                raise ConfigError(f"Hamiltonian is not Hermitian (deviation {deviation:.3e})")

    # ========== Alphabet ==========

    @property
    def is_exact(self) -> bool:
        return self.field == EXACT

    @property
    def labels(self) -> List[str]:
        return [jump.label for jump in self.jumps]

    @property
    def alphabet(self) -> List[str]:
        """Monitored labels in lexicographic order (the tuple-enumeration order)"""
        return sorted(self.monitored)

    @property
    def fully_monitored(self) -> bool:
        return set(self.monitored) == set(self.labels)

    def jump(self, label: str) -> JumpChannel:
        for channel in self.jumps:
            if channel.label == label:
                return channel
        raise UnknownSymbolError(f"Unknown jump channel {label!r}; channels are {self.labels}")

    def check_symbols(self, symbols) -> List[str]:
        """Validate a symbol sequence against the monitored alphabet"""
        symbols = list(symbols)
        bad = sorted({s for s in symbols if s not in self.monitored})
        if bad:
            raise UnknownSymbolError(f"Symbols {bad} are not in the monitored alphabet {self.alphabet}")
        return symbols

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "field": self.field,
            "channels": [{"label": j.label, "rate": str(j.rate)} for j in self.jumps],
            "monitored": self.alphabet,
            "chain": self.chain.to_dict() if self.chain else None,
        }
