"""
Matrix Repository - JSON interchange files for operators and states

Format: {"dim": d, "entries": [[re, im], ...]} with d*d pairs in row-major
order. Float files hold numbers; exact files hold rational strings "p/q".
"""
import json
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.algebra.exact_matrix import ExactMatrix
from src.algebra.scalars import GaussianRational
from src.models.errors import ConfigError, DimensionError
from src.models.open_system import EXACT, FLOAT, FIELDS


def matrix_to_dict(matrix) -> Dict[str, Any]:
    if isinstance(matrix, ExactMatrix):
        if not matrix.is_square():
            raise DimensionError(f"Interchange matrices are square, got {matrix.shape}")
        entries = [x.to_pair() for row in matrix.to_entries() for x in row]
        return {"dim": matrix.n_rows, "exact": True, "entries": entries}
    array = np.asarray(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionError(f"Interchange matrices are square, got {array.shape}")
    entries = [[float(x.real), float(x.imag)] for x in array.reshape(-1)]
    return {"dim": array.shape[0], "exact": False, "entries": entries}


def matrix_from_dict(data: Dict[str, Any], field: str = FLOAT):
    """
    Read an interchange dict into the requested field

    Float pairs read into the exact field go through their decimal repr,
    so 0.5 becomes 1/2.
    """
    if field not in FIELDS:
        raise ConfigError(f"Unknown field {field!r}")
    try:
        dim = int(data["dim"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError):
        raise ConfigError("Matrix file needs 'dim' and 'entries'")
    if len(entries) != dim * dim:
        raise DimensionError(f"Expected {dim * dim} entries for dim {dim}, got {len(entries)}")
    if field == EXACT:
        scalars = [GaussianRational.parse(pair) for pair in entries]
        return ExactMatrix.from_entries([scalars[i * dim:(i + 1) * dim] for i in range(dim)])
    try:
        values = np.array([complex(float(_number(re)), float(_number(im))) for re, im in entries])
    except (TypeError, ValueError):
        raise ConfigError("Matrix entries must be [re, im] pairs")
    return values.reshape(dim, dim)


def _number(value):
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return float(num) / float(den)
    return value


class MatrixRepository:
    """Load and save interchange matrices relative to a base directory"""

    def __init__(self, base_dir: Optional[str] = None):
        self.base_dir = base_dir

    def _path(self, path: str) -> str:
        if self.base_dir and not os.path.isabs(path):
            return os.path.join(self.base_dir, path)
        return path

    def load(self, path: str, field: str = FLOAT):
        full = self._path(path)
        if not os.path.exists(full):
            raise ConfigError(f"Matrix file not found: {full}")
        with open(full, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Matrix file {full} is not valid JSON: {e}")
        return matrix_from_dict(data, field)

    def save(self, path: str, matrix) -> str:
        full = self._path(path)
        directory = os.path.dirname(full)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(full, "w", encoding="utf-8") as f:
            json.dump(matrix_to_dict(matrix), f)
            f.write("\n")
        return full

    def save_states(self, path: str, states: Sequence) -> str:
        """A list of density matrices, one interchange object each"""
        full = self._path(path)
        directory = os.path.dirname(full)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(full, "w", encoding="utf-8") as f:
            json.dump([matrix_to_dict(s) for s in states], f)
            f.write("\n")
        return full

    def load_states(self, path: str, field: str = FLOAT) -> List:
        with open(self._path(path), "r", encoding="utf-8") as f:
            return [matrix_from_dict(item, field) for item in json.load(f)]
