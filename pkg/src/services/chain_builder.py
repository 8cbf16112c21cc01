"""
Model Builders
Boundary-driven XX/XY spin chains, classical Pauli master equations and
generic user Lindbladians, in either the float or the exact field.

Basis convention: single-site operators use sigma+ = [[0,1],[0,0]], so basis
index 0 is the occupied level. Sites are ordered with site 1 as the most
significant factor; the occupation ket |n1...nL> sits at index
sum_i (1 - n_i) 2^(L-i).
"""
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.algebra.exact_matrix import ExactMatrix
from src.algebra.scalars import to_rational
from src.config.analysis_config import TOL_HERMITIAN, VERBOSE_LOGGING
from src.models.errors import ConfigError, DimensionError, UnsupportedModelError
from src.models.open_system import EXACT, FLOAT, FIELDS, ChainSpec, JumpChannel, OpenSystemModel
from src.repositories.matrix_repository import MatrixRepository

_SINGLE_SITE = {
    "plus": [[0, 1], [0, 0]],
    "minus": [[0, 0], [1, 0]],
    "z": [[1, 0], [0, -1]],
    "identity": [[1, 0], [0, 1]],
}


def _check_field(field: str):
    if field not in FIELDS:
        raise ConfigError(f"Unknown field {field!r}; expected one of {FIELDS}")


def _identity(dim: int, field: str):
    return ExactMatrix.identity(dim) if field == EXACT else np.eye(dim, dtype=complex)


def _zeros(dim: int, field: str):
    return ExactMatrix.zeros(dim) if field == EXACT else np.zeros((dim, dim), dtype=complex)


def _qubit_count(dim: int) -> int:
    length = dim.bit_length() - 1
    if dim < 2 or 2 ** length != dim:
        raise UnsupportedModelError(f"Dimension {dim} is not a qubit register")
    return length


def spin_operator(site: int, kind: str, length: int, field: str = FLOAT):
    """
    I x ... x sigma_kind x ... x I with sigma at position `site` (1-indexed)

    Args:
        site: 1 <= site <= length
        kind: 'plus', 'minus' or 'z'
        length: number of sites L (dimension 2^L)
        field: 'float' or 'exact'
    """
    _check_field(field)
    if kind not in ("plus", "minus", "z"):
        raise ConfigError(f"Unknown spin operator kind {kind!r}")
    if not 1 <= site <= length:
        raise DimensionError(f"Site {site} outside 1..{length}")

    factors = [_SINGLE_SITE[kind] if i == site else _SINGLE_SITE["identity"] for i in range(1, length + 1)]
    if field == EXACT:
        result = ExactMatrix.from_entries(factors[0])
        for factor in factors[1:]:
            result = result.kron(ExactMatrix.from_entries(factor))
        return result
    result = np.array(factors[0], dtype=complex)
    for factor in factors[1:]:
        result = np.kron(result, np.array(factor, dtype=complex))
    return result


def number_operator(length: int, field: str = FLOAT):
    total = _zeros(2 ** length, field)
    for site in range(1, length + 1):
        total = total + spin_operator(site, "plus", length, field) @ spin_operator(site, "minus", length, field)
    return total


def _parameter(value, field: str):
    if field == EXACT:
        return to_rational(value)
    try:
        number = float(to_rational(value)) if isinstance(value, str) else float(value)
    except (TypeError, ValueError, ArithmeticError):
        raise ConfigError(f"Not a numeric parameter: {value!r}")
    if not np.isfinite(number):
        raise ConfigError(f"Not a finite parameter: {value!r}")
    return number


def build_xy_chain(spec: ChainSpec, field: str = FLOAT) -> OpenSystemModel:
    """
    Boundary-driven XY chain with injection I on site 1 and extraction E on site L

    H = J sum_i (s+_i s-_{i+1} + s-_i s+_{i+1}) + kappa sum_i (s+_i s+_{i+1} + s-_i s-_{i+1})
    Jumps: I = sqrt(gamma) s+_1, E = sqrt(gamma) s-_L, both monitored.

    Raises:
        ConfigError: exact field with a non-rational parameter
    """
    _check_field(field)
    length = spec.length
    hopping = _parameter(spec.hopping, field)
    kappa = _parameter(spec.kappa, field)
    gamma = _parameter(spec.gamma, field)

    dim = 2 ** length
    hamiltonian = _zeros(dim, field)
    plus = [spin_operator(i, "plus", length, field) for i in range(1, length + 1)]
    minus = [spin_operator(i, "minus", length, field) for i in range(1, length + 1)]
    for i in range(length - 1):
        hop = plus[i] @ minus[i + 1] + minus[i] @ plus[i + 1]
        hamiltonian = hamiltonian + hop * hopping
        if kappa != 0:
            pair = plus[i] @ plus[i + 1] + minus[i] @ minus[i + 1]
            hamiltonian = hamiltonian + pair * kappa

    jumps = (
        JumpChannel("I", plus[0], gamma),
        JumpChannel("E", minus[-1], gamma),
    )
    name = f"{'xx' if spec.is_xx else 'xy'}-L{length}"
    if VERBOSE_LOGGING:
        print(f"✓ Built {name} chain (d={dim}, gamma={spec.gamma}, kappa={spec.kappa}, field={field})")
    return OpenSystemModel(
        dim=dim,
        hamiltonian=hamiltonian,
        jumps=jumps,
        monitored=("I", "E"),
        field=field,
        chain=spec,
        name=name,
    )


def particle_number_conserved(model: OpenSystemModel) -> bool:
    """True iff [H, N] = 0 with N the total occupation (exact or to TOL_HERMITIAN)"""
    length = _qubit_count(model.dim)
    number = number_operator(length, model.field)
    h = model.hamiltonian
    commutator = h @ number - number @ h
    if model.is_exact:
        return commutator.is_zero()
    scale = max(1.0, float(np.max(np.abs(h))) if np.size(h) else 1.0)
    return float(np.max(np.abs(commutator))) <= TOL_HERMITIAN * scale


def _occupations(occupations: Union[str, Sequence[int]]) -> List[int]:
    values = [int(c) for c in occupations]
    if not values or any(v not in (0, 1) for v in values):
        raise ConfigError(f"Occupations must be a nonempty 0/1 string, got {occupations!r}")
    return values


def occupation_index(occupations: Union[str, Sequence[int]]) -> int:
    values = _occupations(occupations)
    length = len(values)
    return sum((1 - n) * 2 ** (length - 1 - i) for i, n in enumerate(values))


def occupation_state(occupations: Union[str, Sequence[int]], field: str = FLOAT):
    """Density matrix |n1..nL><n1..nL| for an occupation string such as '110'"""
    _check_field(field)
    values = _occupations(occupations)
    dim = 2 ** len(values)
    index = occupation_index(values)
    if field == EXACT:
        return ExactMatrix.basis_projector(dim, index)
    state = np.zeros((dim, dim), dtype=complex)
    state[index, index] = 1.0
    return state


def occupation_label(state, tol: float = 1e-12) -> Optional[str]:
    """Occupation string of a computational-basis projector, None for anything else"""
    if isinstance(state, ExactMatrix):
        array = state.to_numpy()
    else:
        array = np.asarray(state, dtype=complex)
    dim = array.shape[0]
    length = _qubit_count(dim)
    diagonal = np.real(np.diag(array))
    index = int(np.argmax(diagonal))
    projector = np.zeros_like(array)
    projector[index, index] = 1.0
    if np.max(np.abs(array - projector)) > tol:
        return None
    bits = format(index, f"0{length}b")
    return "".join("0" if b == "1" else "1" for b in bits)


def _to_field(matrix, field: str):
    if field == EXACT:
        if isinstance(matrix, ExactMatrix):
            return matrix
        if isinstance(matrix, np.ndarray):
            return ExactMatrix.from_complex_array(matrix)
        return ExactMatrix.from_entries(matrix)
    if isinstance(matrix, ExactMatrix):
        return matrix.to_numpy()
    return np.asarray(matrix, dtype=complex)


def build_lindblad_model(
    hamiltonian,
    jumps: Sequence[Tuple],
    monitored: Optional[Sequence[str]] = None,
    field: str = FLOAT,
    name: str = "custom",
) -> OpenSystemModel:
    """
    Generic model from a Hamiltonian and (label, operator[, rate]) jump entries

    Args:
        hamiltonian: d x d matrix (nested lists, array or ExactMatrix)
        jumps: sequence of (label, operator) or (label, operator, rate)
        monitored: monitored labels (default: all channels)
    """
    _check_field(field)
    h = _to_field(hamiltonian, field)
    channels = []
    for entry in jumps:
        if len(entry) == 2:
            label, op = entry
            rate = 1
        elif len(entry) == 3:
            label, op, rate = entry
        else:
            raise ConfigError(f"Jump entries are (label, operator[, rate]), got {len(entry)} fields")
        channels.append(JumpChannel(str(label), _to_field(op, field), _parameter(rate, field)))
    monitored = tuple(monitored) if monitored is not None else tuple(c.label for c in channels)
    return OpenSystemModel(
        dim=h.shape[0],
        hamiltonian=h,
        jumps=tuple(channels),
        monitored=monitored,
        field=field,
        name=name,
    )


def pauli_master_model(
    transitions: Dict[str, Tuple[int, int, Union[int, Fraction, float]]],
    dim: int,
    field: str = FLOAT,
) -> OpenSystemModel:
    """
    Classical rate process: each label k jumps |i> -> |j> at the given rate

    Every M_k then maps into the single population |j><j|, so the symbol
    process is renewal.
    """
    _check_field(field)
    jumps = []
    for label, (source, target, rate) in sorted(transitions.items()):
        if not (0 <= source < dim and 0 <= target < dim):
            raise DimensionError(f"Transition {label}: {source}->{target} outside 0..{dim - 1}")
        op = [[1 if (r == target and c == source) else 0 for c in range(dim)] for r in range(dim)]
        jumps.append((label, op, rate))
    zero = [[0] * dim for _ in range(dim)]
    return build_lindblad_model(zero, jumps, field=field, name=f"pauli-{dim}")


class ChainBuilder:
    """
    Builds models from run-configuration dictionaries
    Mirrors the 'model' section of the JSON run config
    """

    def __init__(self, field: str = FLOAT, base_dir: Optional[str] = None, verbose: bool = None):
        _check_field(field)
        self.field = field
        self.matrices = MatrixRepository(base_dir)
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose

    def build(self, section: Dict) -> OpenSystemModel:
        """
        Build from {"chain": "xx"|"xy", "L", "gamma", "kappa", "hopping"} or from
        matrix files {"hamiltonian": path, "jumps": {label: path or {"path", "rate"}}, "monitored": [...]}
        """
        if "hamiltonian" in section:
            return self.build_from_files(section)
        chain = str(section.get("chain", "xx")).lower()
        if chain not in ("xx", "xy"):
            raise ConfigError(f"Unknown chain type {chain!r}; expected 'xx' or 'xy'")
        kappa = section.get("kappa", 0)
        if chain == "xx":
            if kappa not in (0, "0", None):
                raise ConfigError("An xx chain has kappa = 0; use --chain xy for pairing terms")
            kappa = 0
        spec = ChainSpec(
            length=self._length(section.get("L", 1)),
            gamma=self._value(section.get("gamma", 1)),
            kappa=self._value(kappa),
            hopping=self._value(section.get("hopping", 1)),
        )
        model = build_xy_chain(spec, self.field)
        if self.verbose:
            print(f"✓ Model ready: {model.name} ({model.dim}x{model.dim}, {self.field})")
        return model

    def build_from_files(self, section: Dict) -> OpenSystemModel:
        jumps_section = section.get("jumps")
        if not isinstance(jumps_section, dict) or not jumps_section:
            raise ConfigError("A matrix-file model needs a non-empty 'jumps' mapping")
        hamiltonian = self.matrices.load(section["hamiltonian"], self.field)
        jumps = []
        for label, entry in sorted(jumps_section.items()):
            if isinstance(entry, dict):
                if "path" not in entry:
                    raise ConfigError(f"Jump {label} needs a 'path'")
                jumps.append((label, self.matrices.load(entry["path"], self.field), entry.get("rate", 1)))
            else:
                jumps.append((label, self.matrices.load(entry, self.field)))
        model = build_lindblad_model(
            hamiltonian, jumps, section.get("monitored"), self.field,
            name=section.get("name", "custom"),
        )
        if self.verbose:
            print(f"✓ Model ready: {model.name} ({model.dim}x{model.dim}, {self.field}, "
                  f"monitored {', '.join(model.alphabet)})")
        return model

    def _length(self, raw) -> int:
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"L must be an integer, got {raw!r}")

    def _value(self, raw):
        if self.field == EXACT:
            return to_rational(raw)
        try:
            value = float(Fraction(str(raw))) if isinstance(raw, str) else float(raw)
        except (TypeError, ValueError, ArithmeticError):
            raise ConfigError(f"Not a numeric parameter: {raw!r}")
        if not np.isfinite(value):
            raise ConfigError(f"Not a finite parameter: {raw!r}")
        return value
