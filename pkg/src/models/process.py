"""
Superoperator and channel-process models
Derived objects built from an OpenSystemModel by the channel engine
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from src.models.errors import NumericError, UnknownSymbolError
from src.models.open_system import OpenSystemModel


class SuperoperatorRole(Enum):
    """What a d^2 x d^2 matrix stands for"""
    LIOUVILLIAN = "liouvillian"
    JUMP = "jump"
    NO_JUMP = "no_jump"
    CHANNEL_MAP = "channel_map"
    TOTAL_MAP = "total_map"
    DRAZIN = "drazin"


def _as_array(matrix) -> np.ndarray:
    if hasattr(matrix, "to_numpy"):
        return matrix.to_numpy()
    return np.asarray(matrix, dtype=complex)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Matrix acting on column-stacked operators"""
    dim: int
    matrix: Any  # np.ndarray or ExactMatrix
    role: SuperoperatorRole
    label: Optional[str] = None

    @property
    def is_exact(self) -> bool:
        return hasattr(self.matrix, "canonical_key")

    def apply(self, vector):
        return self.matrix @ vector

    def to_float(self) -> "Superoperator":
        if not self.is_exact:
            return self
        return Superoperator(self.dim, self.matrix.to_numpy(), self.role, self.label)

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self.dim, "role": self.role.value, "label": self.label, "exact": self.is_exact}


@dataclass(eq=False)
class SpectralData:
    """
    Eigenvalues with bi-orthonormal eigenvectors
    right[:, j] is u_j, left[j, :] is v_j^dagger; both None when defective
    """
    eigenvalues: np.ndarray
    right: Optional[np.ndarray] = None
    left: Optional[np.ndarray] = None
    diagonalizable: bool = False
    condition: float = float("nan")

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    def stationary_index(self) -> int:
        """Index of the eigenvalue closest to 1"""
        return int(np.argmin(np.abs(self.eigenvalues - 1)))

    def projector(self, j: int) -> np.ndarray:
        """Eigenprojector |u_j>><<v_j|"""
        if not self.diagonalizable:
            raise NumericError("Eigenprojectors need a diagonalizable matrix")
        return np.outer(self.right[:, j], self.left[j, :])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "diagonalizable": self.diagonalizable,
            "condition": self.condition,
            "spectral_radius": self.spectral_radius,
        }


@dataclass(eq=False)
class ChannelProcess:
    """
    Everything the statistics layer needs about a monitored model

    Matrices are ExactMatrix instances for exact models and complex arrays
    otherwise; to_float() gives the float view of an exact process.
    """
    model: OpenSystemModel
    liouvillian: Superoperator
    no_jump: Superoperator
    jumps: Dict[str, Superoperator]
    channel_maps: Dict[str, Superoperator]
    total_map: Superoperator
    no_jump_inverse: Any
    steady_state: Any
    jss: Any
    activity: Any
    spectrum: Optional[SpectralData] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    _float_view: Optional["ChannelProcess"] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def alphabet(self) -> List[str]:
        return self.model.alphabet

    @property
    def is_exact(self) -> bool:
        return self.liouvillian.is_exact

    def channel_matrix(self, label: str):
        try:
            return self.channel_maps[label].matrix
        except KeyError:
            raise UnknownSymbolError(f"Symbol {label!r} is not in the monitored alphabet {self.alphabet}")

    def jump_matrix(self, label: str):
        try:
            return self.jumps[label].matrix
        except KeyError:
            raise UnknownSymbolError(f"Symbol {label!r} is not in the monitored alphabet {self.alphabet}")

    def to_float(self) -> "ChannelProcess":
        """Float view (cached); float processes return themselves"""
        if not self.is_exact:
            return self
        if self._float_view is None:
            self._float_view = ChannelProcess(
                model=self.model,
                liouvillian=self.liouvillian.to_float(),
                no_jump=self.no_jump.to_float(),
                jumps={k: s.to_float() for k, s in self.jumps.items()},
                channel_maps={k: s.to_float() for k, s in self.channel_maps.items()},
                total_map=self.total_map.to_float(),
                no_jump_inverse=_as_array(self.no_jump_inverse),
                steady_state=_as_array(self.steady_state),
                jss=_as_array(self.jss),
                activity=float(complex(self.activity).real),
                spectrum=self.spectrum,
                diagnostics=dict(self.diagnostics),
            )
        return self._float_view

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "activity": float(complex(self.activity).real),
            "spectrum": self.spectrum.to_dict() if self.spectrum else None,
            "diagnostics": self.diagnostics,
        }


@dataclass(eq=False)
class DrazinData:
    """Drazin inverse L+ of the Liouvillian with B = (J L+ - 1)^-1 and g = <<1|B J|rho_ss>>"""
    drazin: Superoperator
    b_matrix: np.ndarray
    g: complex
    steady_vector: np.ndarray
    diagnostics: Dict[str, Any] = field(default_factory=dict)


@dataclass
class PositivityReport:
    label: str
    trials: int
    worst_min_eigenvalue: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_min_eigenvalue >= -self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "trials": self.trials,
            "worst_min_eigenvalue": self.worst_min_eigenvalue,
            "passed": self.passed,
        }


@dataclass
class DrazinReport:
    """Max-norm deviations of the Drazin identities from direct construction"""
    no_jump_inverse_deviation: float
    total_map_deviation: float
    b_inverse_deviation: float
    drazin_identity_deviation: float
    tolerance: float

    @property
    def consistent(self) -> bool:
        return max(
            self.no_jump_inverse_deviation,
            self.total_map_deviation,
            self.b_inverse_deviation,
            self.drazin_identity_deviation,
        ) <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "no_jump_inverse_deviation": self.no_jump_inverse_deviation,
            "total_map_deviation": self.total_map_deviation,
            "b_inverse_deviation": self.b_inverse_deviation,
            "drazin_identity_deviation": self.drazin_identity_deviation,
            "consistent": self.consistent,
        }
