#!/usr/bin/env python3
"""
Algebra Layer Tests
===================
Exact Gaussian-rational scalars and matrices, vectorization conventions and
the float helpers (eigendecomposition, kernels, density checks)
"""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from src.algebra import (
    ExactMatrix,
    GaussianRational,
    eig,
    exact_inverse,
    exact_null_vector,
    exact_rank,
    exact_solve,
    is_density,
    null_vector,
    random_density,
    sandwich,
    superop_left,
    superop_right,
    to_rational,
    trace_distance,
    unvectorize,
    vectorize,
)
from src.models.errors import ConfigError, DegeneracyError, SingularMatrixError


def test_gaussian_rational_arithmetic():
    """Closed exact arithmetic on re + i im"""
    print("=" * 60)
    print("TEST 1: Gaussian rationals")
    print("=" * 60)

    a = GaussianRational(1, 2)
    b = GaussianRational(3, -1)
    assert a * b == GaussianRational(5, 5)
    assert a + b == GaussianRational(4, 1)
    assert (a / b) * b == a
    assert a.conjugate() == GaussianRational(1, -2)
    assert GaussianRational(Fraction(1, 2)) == Fraction(1, 2)
    assert GaussianRational.parse(["3/8", "-1/4"]) == GaussianRational(Fraction(3, 8), Fraction(-1, 4))
    assert GaussianRational(Fraction(3, 8), 1).to_pair() == ["3/8", "1"]
    print(f"✓ (1+2i)(3-i) = {a * b}")

    assert to_rational("1/2") == Fraction(1, 2)
    assert to_rational(0.5) == Fraction(1, 2)
    assert to_rational(3) == 3
    for bad in (float("nan"), "abc", True):
        try:
            to_rational(bad)
            assert False, f"{bad!r} should not be rational"
        except ConfigError:
            pass
    print("✓ Parameter parsing rejects non-rational input")


def test_exact_inverse_and_rank():
    """Gauss-Jordan inverse, rank and solve"""
    print("=" * 60)
    print("TEST 2: Exact inverse / rank / solve")
    print("=" * 60)

    a = ExactMatrix.from_entries([[2, 1], [1, 1]])
    inv = exact_inverse(a)
    assert inv == ExactMatrix.from_entries([[1, -1], [-1, 2]])
    assert a @ inv == ExactMatrix.identity(2)
    print("✓ [[2,1],[1,1]]^-1 = [[1,-1],[-1,2]]")

    complex_matrix = ExactMatrix.from_entries([
        [GaussianRational(0, 1), 1, 0],
        [0, "1/3", GaussianRational(1, 1)],
        [2, 0, 1],
    ])
    assert complex_matrix @ exact_inverse(complex_matrix) == ExactMatrix.identity(3)
    print("✓ Complex 3x3 inverse is exact")

    singular = ExactMatrix.from_entries([[1, 2], [2, 4]])
    assert exact_rank(singular) == 1
    assert exact_rank(ExactMatrix.identity(4), stop_at=2) == 2
    try:
        exact_inverse(singular)
        assert False, "singular matrix inverted"
    except SingularMatrixError:
        pass
    print("✓ Rank 1 detected; singular inverse raises")

    rhs = ExactMatrix.from_entries([[3], [2]])
    x = exact_solve(a, rhs)
    assert a @ x == rhs
    assert x == ExactMatrix.from_entries([[1], [1]])
    print("✓ exact_solve")


def test_exact_matrix_identity_and_sparsity():
    """Reduced representation, hashing and the sparse matrix-vector product"""
    print("=" * 60)
    print("TEST 3: Canonical form and apply()")
    print("=" * 60)

    half = ExactMatrix.from_entries([["1/2", 0], [0, "1/2"]])
    assert half * 2 == ExactMatrix.identity(2)
    assert hash(half * 2) == hash(ExactMatrix.identity(2))
    assert half.denominator == 2
    assert (half * 2).denominator == 1
    print("✓ Scaling reduces to the identity with denominator 1")

    rng = np.random.default_rng(3)
    for _ in range(5):
        entries = rng.integers(-3, 4, size=(4, 4))
        m = ExactMatrix.from_entries([[GaussianRational(int(x), int(y)) for x, y in zip(row, row[::-1])] for row in entries])
        v = ExactMatrix.from_entries([[Fraction(int(x), 3)] for x in rng.integers(-2, 3, size=4)])
        assert m.apply(v) == m @ v
    print("✓ apply() agrees with @ on random integer matrices")

    rho = ExactMatrix.from_entries([["1/4", GaussianRational(0, Fraction(1, 8))], [GaussianRational(0, Fraction(-1, 8)), "3/4"]])
    assert rho.is_hermitian()
    assert rho.trace() == 1
    assert rho.vectorize().vector_trace(2) == 1
    assert rho.vectorize().unvectorize(2) == rho
    print("✓ Hermitian unit-trace state survives vectorize/unvectorize")


def test_vectorization_convention():
    """Column stacking: vec(A rho B) = (B^T kron A) vec(rho)"""
    print("=" * 60)
    print("TEST 4: Column-stacking convention")
    print("=" * 60)

    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(vectorize(m), [1, 3, 2, 4])
    exact = ExactMatrix.from_entries([[1, 2], [3, 4]])
    assert [exact.vectorize().entry(i, 0) for i in range(4)] == [1, 3, 2, 4]
    print("✓ [[1,2],[3,4]] -> [1,3,2,4] in both fields")

    rng = np.random.default_rng(11)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = random_density(3, rng)
    assert np.allclose(sandwich(a, b) @ vectorize(rho), vectorize(a @ rho @ b))
    assert np.allclose(superop_left(a) @ vectorize(rho), vectorize(a @ rho))
    assert np.allclose(superop_right(b) @ vectorize(rho), vectorize(rho @ b))
    assert np.allclose(unvectorize(vectorize(rho)), rho)

    ea = ExactMatrix.from_entries([[1, GaussianRational(0, 1)], [0, 2]])
    eb = ExactMatrix.from_entries([["1/2", 0], [1, 1]])
    erho = ExactMatrix.from_entries([[1, 0], [0, 0]])
    assert sandwich(ea, eb) @ erho.vectorize() == (ea @ erho @ eb).vectorize()
    print("✓ sandwich / left / right superoperators match direct products")


def test_float_spectral_helpers():
    """Biorthogonal eigenvectors, kernels and density checks"""
    print("=" * 60)
    print("TEST 5: Float spectral helpers")
    print("=" * 60)

    rng = np.random.default_rng(5)
    matrix = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    spectrum = eig(matrix)
    assert spectrum.diagonalizable
    assert np.allclose(spectrum.left @ spectrum.right, np.eye(5))
    assert np.all(np.diff(np.abs(spectrum.eigenvalues)) <= 1e-12)
    print("✓ Left rows of V^-1 are biorthonormal to right columns")

    jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert not eig(jordan).diagonalizable
    print("✓ Jordan block reported as defective")

    # qubit decay at rate 1: steady state |1><1| in the index-1 slot
    lower = np.array([[0, 0], [1, 0]], dtype=complex)
    generator = sandwich(lower, lower.conj().T) - 0.5 * (
        superop_left(lower.conj().T @ lower) + superop_right(lower.conj().T @ lower)
    )
    steady = null_vector(generator)
    assert np.allclose(steady, np.diag([0, 1]))
    assert is_density(steady)
    print("✓ null_vector finds the decay fixed point")

    try:
        null_vector(np.zeros((4, 4)))
        assert False, "degenerate kernel accepted"
    except DegeneracyError:
        pass
    print("✓ Degenerate kernel raises DegeneracyError")

    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert abs(trace_distance(p0, p1) - 1.0) < 1e-12
    assert is_density(random_density(4, rng, rank=2))
    assert not is_density(np.diag([1.5, -0.5]))
    print("✓ trace_distance and is_density")


def test_exact_null_vector():
    """Exact unit-trace kernel of a rational generator"""
    print("=" * 60)
    print("TEST 6: Exact steady state")
    print("=" * 60)

    raise_op = ExactMatrix.from_entries([[0, 1], [0, 0]])
    lower = raise_op.dagger()
    # pumping at rate 1 and decay at rate 3: populations 1/4 (index 0) and 3/4
    generator = ExactMatrix.zeros(4)
    for op, rate in ((raise_op, 1), (lower, 3)):
        n = op.dagger() @ op
        generator = generator + (sandwich(op, op.dagger()) - (superop_left(n) + superop_right(n)) * Fraction(1, 2)) * rate
    steady = exact_null_vector(generator, 2)
    assert steady == ExactMatrix.from_entries([["1/4", 0], [0, "3/4"]])
    print(f"✓ Exact steady state diag(1/4, 3/4)")

    try:
        exact_null_vector(ExactMatrix.zeros(4), 2)
        assert False, "zero generator accepted"
    except DegeneracyError:
        pass
    print("✓ Zero generator raises DegeneracyError")


def main():
    """Run all tests"""
    print("\n" + "=" * 60)
    print("  ALGEBRA LAYER - TESTS")
    print("=" * 60 + "\n")

    try:
        test_gaussian_rational_arithmetic()
        test_exact_inverse_and_rank()
        test_exact_matrix_identity_and_sparsity()
        test_vectorization_convention()
        test_float_spectral_helpers()
        test_exact_null_vector()

        print("=" * 60)
        print("  ✅ ALL TESTS PASSED!")
        print("=" * 60)
        return 0

    except Exception as e:
        print(f"\n❌ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    exit(main())
