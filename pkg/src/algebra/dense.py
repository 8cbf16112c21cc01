"""
Dense complex linear algebra for the float field, plus field-agnostic
vectorization and superoperator builders.

Vectorization is column stacking throughout: entry (i, j) of a d x d operator
sits at index j*d + i, so vec(A rho B) = (B^T kron A) vec(rho).
"""
from typing import Optional, Union

import numpy as np
from scipy import linalg

from src.algebra.exact_matrix import ExactMatrix
from src.config.analysis_config import COND_MAX, TOL_PSD, TOL_RANK
from src.models.errors import DegeneracyError, DimensionError, NumericError
from src.models.process import SpectralData

MatrixLike = Union[np.ndarray, ExactMatrix]


# ==================== Vectorization ====================

def vectorize(matrix: MatrixLike) -> MatrixLike:
    """Column-stack a square operator (exact matrices give a d^2 x 1 column)"""
    if isinstance(matrix, ExactMatrix):
        return matrix.vectorize()
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"vectorize needs a square matrix, got shape {matrix.shape}")
    return matrix.reshape(-1, order="F")


def unvectorize(vector: MatrixLike, dim: Optional[int] = None) -> MatrixLike:
    if isinstance(vector, ExactMatrix):
        return vector.unvectorize(dim)
    vector = np.asarray(vector).reshape(-1)
    dim = dim or int(round(np.sqrt(vector.size)))
    if dim * dim != vector.size:
        raise DimensionError(f"Length {vector.size} is not a perfect square")
    return vector.reshape((dim, dim), order="F")


def trace_functional(dim: int) -> np.ndarray:
    """<<1| as a length-d^2 row: <<1|x>> = tr(unvec(x))"""
    return np.eye(dim, dtype=complex).reshape(-1, order="F")


# ==================== Superoperator builders ====================

def _check_square(matrix: MatrixLike):
    shape = matrix.shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionError(f"Expected a square operator, got shape {shape}")


def superop_left(matrix: MatrixLike) -> MatrixLike:
    """Matrix of rho -> A rho, i.e. I kron A"""
    _check_square(matrix)
    if isinstance(matrix, ExactMatrix):
        return ExactMatrix.identity(matrix.n_rows).kron(matrix)
    matrix = np.asarray(matrix, dtype=complex)
    return np.kron(np.eye(matrix.shape[0]), matrix)


def superop_right(matrix: MatrixLike) -> MatrixLike:
    """Matrix of rho -> rho A, i.e. A^T kron I"""
    _check_square(matrix)
    if isinstance(matrix, ExactMatrix):
        return matrix.transpose().kron(ExactMatrix.identity(matrix.n_rows))
    matrix = np.asarray(matrix, dtype=complex)
    return np.kron(matrix.T, np.eye(matrix.shape[0]))


def sandwich(left: MatrixLike, right: MatrixLike) -> MatrixLike:
    """Matrix of rho -> A rho B, i.e. B^T kron A"""
    if isinstance(left, ExactMatrix):
        return right.transpose().kron(left)
    return np.kron(np.asarray(right).T, np.asarray(left))


# ==================== Spectra and kernels ====================

def eig(matrix: np.ndarray, cond_max: float = COND_MAX) -> SpectralData:
    """
    Eigendecomposition with bi-orthonormal left/right eigenvectors

    Eigenvalues are ordered by decreasing modulus (stable). Right vectors are
    the columns of V, left vectors the rows of V^-1, so <<v_j|u_k>> = delta_jk.
    If V is numerically singular (condition number above cond_max) the matrix
    is treated as defective and only eigenvalues are returned.

    Raises:
        NumericError: LAPACK did not converge
    """
    matrix = np.asarray(matrix, dtype=complex)
    _check_square(matrix)
    try:
        values, vectors = linalg.eig(matrix)
    except linalg.LinAlgError as e:
        residual = float(np.max(np.abs(matrix))) if matrix.size else 0.0
        raise NumericError(f"Eigendecomposition did not converge: {e}", residual=residual)

    order = np.argsort(-np.abs(values), kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    condition = np.linalg.cond(vectors) if vectors.size else 1.0
    if not np.isfinite(condition) or condition > cond_max:
        return SpectralData(eigenvalues=values, diagonalizable=False, condition=float(condition))

    left = linalg.inv(vectors)
    return SpectralData(
        eigenvalues=values,
        right=vectors,
        left=left,
        diagonalizable=True,
        condition=float(condition),
    )


def kernel_dimension(matrix: np.ndarray, tol_rank: float = TOL_RANK) -> int:
    singular = linalg.svdvals(np.asarray(matrix, dtype=complex))
    if singular.size == 0 or singular[0] == 0:
        return matrix.shape[1]
    return int(np.sum(singular <= tol_rank * singular[0]))


def null_vector(matrix: np.ndarray, tol_rank: float = TOL_RANK) -> np.ndarray:
    """
    Unit-trace Hermitian operator spanning the kernel of a d^2 x d^2 generator

    Raises:
        DegeneracyError: kernel dimension at relative tolerance tol_rank is not 1
    """
    matrix = np.asarray(matrix, dtype=complex)
    _check_square(matrix)
    _, singular, vh = linalg.svd(matrix)
    scale = singular[0] if singular.size and singular[0] > 0 else 1.0
    dim_kernel = int(np.sum(singular <= tol_rank * scale))
    if dim_kernel != 1:
        raise DegeneracyError(
            f"Steady state is not unique: kernel dimension {dim_kernel} at tol_rank={tol_rank}",
            residual=float(singular[-1]) if singular.size else None,
        )
    state = unvectorize(vh[-1].conj())
    trace = np.trace(state)
    if abs(trace) < tol_rank:
        raise DegeneracyError("Kernel vector is traceless; cannot normalize to a state")
    return hermitize(state / trace)


# ==================== Density-matrix helpers ====================

def hermitize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.min(linalg.eigvalsh(hermitize(np.asarray(matrix, dtype=complex)))))


def is_density(matrix: np.ndarray, tol_psd: float = TOL_PSD, tol_trace: float = 1e-10) -> bool:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if np.max(np.abs(matrix - matrix.conj().T)) > tol_trace:
        return False
    if abs(np.trace(matrix) - 1) > tol_trace:
        return False
    return min_eigenvalue(matrix) >= -tol_psd


def trace_distance(first: np.ndarray, second: np.ndarray) -> float:
    """Half the sum of singular values of the difference"""
    return 0.5 * float(np.sum(linalg.svdvals(np.asarray(first) - np.asarray(second))))


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble of the given rank"""
    rank = rank or dim
    ginibre = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = ginibre @ ginibre.conj().T
    return hermitize(rho / np.trace(rho))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * hermitize(a)


def max_norm(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if np.size(matrix) else 0.0
