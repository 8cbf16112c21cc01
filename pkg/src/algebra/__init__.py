"""Matrix algebra over complex floats and exact Gaussian rationals"""
from src.algebra.scalars import GaussianRational, to_rational, ZERO, ONE, I_UNIT
from src.algebra.exact_matrix import (
    ExactMatrix,
    exact_inverse,
    exact_solve,
    exact_rank,
    exact_null_vector,
    trace_row,
)
from src.algebra.dense import (
    vectorize,
    unvectorize,
    trace_functional,
    superop_left,
    superop_right,
    sandwich,
    eig,
    kernel_dimension,
    null_vector,
    hermitize,
    min_eigenvalue,
    is_density,
    trace_distance,
    random_density,
    random_hermitian,
    max_norm,
)

__all__ = [
    "GaussianRational",
    "to_rational",
    "ZERO",
    "ONE",
    "I_UNIT",
    "ExactMatrix",
    "exact_inverse",
    "exact_solve",
    "exact_rank",
    "exact_null_vector",
    "trace_row",
    "vectorize",
    "unvectorize",
    "trace_functional",
    "superop_left",
    "superop_right",
    "sandwich",
    "eig",
    "kernel_dimension",
    "null_vector",
    "hermitize",
    "min_eigenvalue",
    "is_density",
    "trace_distance",
    "random_density",
    "random_hermitian",
    "max_norm",
]
