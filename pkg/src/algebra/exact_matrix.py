"""
Exact dense-semantics matrices over the Gaussian rationals.

Storage is sparse and fraction-free: every matrix keeps Gaussian-integer
numerators (re, im) per nonzero entry plus one positive common denominator,
always reduced so that the gcd of all numerator parts and the denominator is 1.
The reduced form is unique, so equality and hashing are exact entrywise
comparisons.

Elimination routines (inverse, solve, rank) work row-wise on Gaussian-rational
scalars with sparsity-aware pivoting.
"""
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.scalars import GaussianRational, ONE, to_rational
from src.models.errors import DegeneracyError, DimensionError, SingularMatrixError

Numerator = Tuple[int, int]
Row = Dict[int, Numerator]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _scalar_parts(value) -> Tuple[int, int, int]:
    """Write a scalar as (a + b i) / c with integers a, b and c > 0"""
    value = GaussianRational.coerce(value)
    c = _lcm(value.re.denominator, value.im.denominator)
    return value.re.numerator * (c // value.re.denominator), value.im.numerator * (c // value.im.denominator), c


class ExactMatrix:
    """Immutable Gaussian-rational matrix with a common denominator"""

    __slots__ = ("n_rows", "n_cols", "_rows", "_den", "_cols")

    def __init__(self, n_rows: int, n_cols: int, rows: Sequence[Row], den: int = 1, reduce: bool = True):
        if len(rows) != n_rows:
            raise DimensionError(f"Expected {n_rows} rows, got {len(rows)}")
        if den <= 0:
            raise ValueError("Common denominator must be positive")
        self.n_rows = n_rows
        self.n_cols = n_cols
        self._rows = tuple(rows)
        self._den = den
        self._cols = None
        if reduce:
            self._reduce()

    def _reduce(self):
        g = self._den
        if g == 1:
            return
        for row in self._rows:
            for re, im in row.values():
                g = gcd(g, re)
                if g == 1:
                    return
                g = gcd(g, im)
                if g == 1:
                    return
        if not any(self._rows):
            self._den = 1
            return
        self._rows = tuple({j: (re // g, im // g) for j, (re, im) in row.items()} for row in self._rows)
        self._den //= g

    # ========== Constructors ==========

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence]) -> "ExactMatrix":
        """Build from a nested list of scalars (ints, Fractions, strings, GaussianRationals)"""
        scalars = [[GaussianRational.coerce(x) for x in row] for row in entries]
        n_rows = len(scalars)
        n_cols = len(scalars[0]) if n_rows else 0
        den = 1
        for row in scalars:
            if len(row) != n_cols:
                raise DimensionError("Ragged entry list")
            for x in row:
                den = _lcm(den, _lcm(x.re.denominator, x.im.denominator))
        rows = []
        for row in scalars:
            packed = {}
            for j, x in enumerate(row):
                if not x.is_zero():
                    packed[j] = (x.re.numerator * (den // x.re.denominator), x.im.numerator * (den // x.im.denominator))
            rows.append(packed)
        return cls(n_rows, n_cols, rows, den)

    @classmethod
    def from_scalar_rows(cls, n_cols: int, rows: Sequence[Dict[int, GaussianRational]]) -> "ExactMatrix":
        """Build from sparse rows of GaussianRational values"""
        den = 1
        for row in rows:
            for x in row.values():
                den = _lcm(den, _lcm(x.re.denominator, x.im.denominator))
        packed = [
            {j: (x.re.numerator * (den // x.re.denominator), x.im.numerator * (den // x.im.denominator))
             for j, x in row.items() if not x.is_zero()}
            for row in rows
        ]
        return cls(len(rows), n_cols, packed, den)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int = None) -> "ExactMatrix":
        n_cols = n_rows if n_cols is None else n_cols
        return cls(n_rows, n_cols, [{} for _ in range(n_rows)], 1, reduce=False)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, [{i: (1, 0)} for i in range(n)], 1, reduce=False)

    @classmethod
    def basis_projector(cls, dim: int, index: int) -> "ExactMatrix":
        rows = [{} for _ in range(dim)]
        rows[index] = {index: (1, 0)}
        return cls(dim, dim, rows, 1, reduce=False)

    @classmethod
    def from_complex_array(cls, array) -> "ExactMatrix":
        """Read a float array exactly through the decimal repr of each part"""
        array = np.asarray(array, dtype=complex)
        return cls.from_entries([
            [GaussianRational(to_rational(float(x.real)), to_rational(float(x.imag))) for x in row]
            for row in array
        ])

    # ========== Access ==========

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._rows)

    def entry(self, i: int, j: int) -> GaussianRational:
        re, im = self._rows[i].get(j, (0, 0))
        return GaussianRational(Fraction(re, self._den), Fraction(im, self._den))

    def scalar(self) -> GaussianRational:
        if self.shape != (1, 1):
            raise DimensionError(f"scalar() needs a 1x1 matrix, got {self.shape}")
        return self.entry(0, 0)

    def items(self) -> Iterable[Tuple[int, int, GaussianRational]]:
        for i, row in enumerate(self._rows):
            for j in sorted(row):
                yield i, j, self.entry(i, j)

    def scalar_rows(self) -> List[Dict[int, GaussianRational]]:
        return [{j: self.entry(i, j) for j in row} for i, row in enumerate(self._rows)]

    def to_entries(self) -> List[List[GaussianRational]]:
        return [[self.entry(i, j) for j in range(self.n_cols)] for i in range(self.n_rows)]

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        den = self._den
        for i, row in enumerate(self._rows):
            for j, (re, im) in row.items():
                out[i, j] = complex(re / den, im / den)
        return out

    def column(self, j: int) -> "ExactMatrix":
        rows = [{0: row[j]} if j in row else {} for row in self._rows]
        return ExactMatrix(self.n_rows, 1, rows, self._den)

    def apply(self, vector: "ExactMatrix") -> "ExactMatrix":
        """
        Matrix-vector product touching only the columns where the vector is nonzero
        Same result as self @ vector; the column index is built on first use
        """
        if vector.shape != (self.n_cols, 1):
            raise DimensionError(f"Cannot apply {self.shape} to a vector of shape {vector.shape}")
        if self._cols is None:
            cols: List[Row] = [{} for _ in range(self.n_cols)]
            for i, row in enumerate(self._rows):
                for j, value in row.items():
                    cols[j][i] = value
            self._cols = cols
        acc: Dict[int, List[int]] = {}
        for k, row in enumerate(vector._rows):
            if not row:
                continue
            br, bi = row[0]
            for i, (ar, ai) in self._cols[k].items():
                cell = acc.get(i)
                if cell is None:
                    acc[i] = [ar * br - ai * bi, ar * bi + ai * br]
                else:
                    cell[0] += ar * br - ai * bi
                    cell[1] += ar * bi + ai * br
        rows = [{} for _ in range(self.n_rows)]
        for i, (re, im) in acc.items():
            if re or im:
                rows[i] = {0: (re, im)}
        return ExactMatrix(self.n_rows, 1, rows, self._den * vector._den)

    def vector_trace(self, dim: int) -> GaussianRational:
        """tr(unvec(v)) for a column-stacked d^2 x 1 vector"""
        if self.shape != (dim * dim, 1):
            raise DimensionError(f"Expected a {dim * dim} x 1 vector, got {self.shape}")
        re = im = 0
        for j in range(dim):
            value = self._rows[j * dim + j].get(0)
            if value is not None:
                re += value[0]
                im += value[1]
        return GaussianRational(Fraction(re, self._den), Fraction(im, self._den))

    def nonzero_columns(self) -> List[int]:
        cols = set()
        for row in self._rows:
            cols.update(row)
        return sorted(cols)

    def denominator_bits(self) -> int:
        return self._den.bit_length()

    def max_bits(self) -> int:
        bits = self._den.bit_length()
        for row in self._rows:
            for re, im in row.values():
                bits = max(bits, abs(re).bit_length(), abs(im).bit_length())
        return bits

    def is_zero(self) -> bool:
        return not any(self._rows)

    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    # ========== Arithmetic ==========

    def _combine(self, other: "ExactMatrix", sign: int) -> "ExactMatrix":
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionError(f"Shape mismatch {self.shape} vs {other.shape}")
        den = _lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        rows = []
        for ra, rb in zip(self._rows, other._rows):
            out = {j: (re * fa, im * fa) for j, (re, im) in ra.items()}
            for j, (re, im) in rb.items():
                cur = out.get(j, (0, 0))
                nre, nim = cur[0] + sign * re * fb, cur[1] + sign * im * fb
                if nre or nim:
                    out[j] = (nre, nim)
                else:
                    out.pop(j, None)
            rows.append(out)
        return ExactMatrix(self.n_rows, self.n_cols, rows, den)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        rows = [{j: (-re, -im) for j, (re, im) in row.items()} for row in self._rows]
        return ExactMatrix(self.n_rows, self.n_cols, rows, self._den, reduce=False)

    def scale(self, value) -> "ExactMatrix":
        a, b, c = _scalar_parts(value)
        if a == 0 and b == 0:
            return ExactMatrix.zeros(self.n_rows, self.n_cols)
        rows = [
            {j: (re * a - im * b, re * b + im * a) for j, (re, im) in row.items()}
            for row in self._rows
        ]
        return ExactMatrix(self.n_rows, self.n_cols, rows, self._den * c)

    def __mul__(self, value):
        if isinstance(value, ExactMatrix):
            raise TypeError("Use @ for matrix products")
        return self.scale(value)

    __rmul__ = __mul__

    def __truediv__(self, value):
        value = GaussianRational.coerce(value)
        if value.is_zero():
            raise ZeroDivisionError("division of exact matrix by zero")
        return self.scale(ONE / value)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.n_cols != other.n_rows:
            raise DimensionError(f"Cannot multiply {self.shape} by {other.shape}")
        other_rows = other._rows
        rows = []
        for row in self._rows:
            acc: Dict[int, List[int]] = {}
            for k, (ar, ai) in row.items():
                for j, (br, bi) in other_rows[k].items():
                    cell = acc.get(j)
                    if cell is None:
                        acc[j] = [ar * br - ai * bi, ar * bi + ai * br]
                    else:
                        cell[0] += ar * br - ai * bi
                        cell[1] += ar * bi + ai * br
            rows.append({j: (re, im) for j, (re, im) in acc.items() if re or im})
        return ExactMatrix(self.n_rows, other.n_cols, rows, self._den * other._den)

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        n2, m2 = other.shape
        rows = []
        for ra in self._rows:
            for rb in other._rows:
                out = {}
                for j1, (ar, ai) in ra.items():
                    for j2, (br, bi) in rb.items():
                        out[j1 * m2 + j2] = (ar * br - ai * bi, ar * bi + ai * br)
                rows.append(out)
        return ExactMatrix(self.n_rows * n2, self.n_cols * m2, rows, self._den * other._den)

    def transpose(self) -> "ExactMatrix":
        rows = [{} for _ in range(self.n_cols)]
        for i, row in enumerate(self._rows):
            for j, value in row.items():
                rows[j][i] = value
        return ExactMatrix(self.n_cols, self.n_rows, rows, self._den, reduce=False)

    def conj(self) -> "ExactMatrix":
        rows = [{j: (re, -im) for j, (re, im) in row.items()} for row in self._rows]
        return ExactMatrix(self.n_rows, self.n_cols, rows, self._den, reduce=False)

    def dagger(self) -> "ExactMatrix":
        return self.transpose().conj()

    def trace(self) -> GaussianRational:
        if not self.is_square():
            raise DimensionError("Trace of a non-square matrix")
        re = sum(row.get(i, (0, 0))[0] for i, row in enumerate(self._rows))
        im = sum(row.get(i, (0, 0))[1] for i, row in enumerate(self._rows))
        return GaussianRational(Fraction(re, self._den), Fraction(im, self._den))

    def is_hermitian(self) -> bool:
        return self.is_square() and self == self.dagger()

    # ========== Vectorization (column stacking) ==========

    def vectorize(self) -> "ExactMatrix":
        if not self.is_square():
            raise DimensionError(f"vectorize needs a square matrix, got {self.shape}")
        d = self.n_rows
        rows = [{} for _ in range(d * d)]
        for i, row in enumerate(self._rows):
            for j, value in row.items():
                rows[j * d + i] = {0: value}
        return ExactMatrix(d * d, 1, rows, self._den, reduce=False)

    def unvectorize(self, dim: int = None) -> "ExactMatrix":
        if self.n_cols != 1:
            raise DimensionError("unvectorize needs a column vector")
        dim = dim or int(round(self.n_rows ** 0.5))
        if dim * dim != self.n_rows:
            raise DimensionError(f"Length {self.n_rows} is not a square")
        rows = [{} for _ in range(dim)]
        for index, row in enumerate(self._rows):
            if 0 in row:
                j, i = divmod(index, dim)
                rows[i][j] = row[0]
        return ExactMatrix(dim, dim, rows, self._den, reduce=False)

    # ========== Identity ==========

    def canonical_key(self) -> tuple:
        """Unique key of the reduced representation"""
        flat = tuple(
            (i, j, re, im)
            for i, row in enumerate(self._rows)
            for j, (re, im) in sorted(row.items())
        )
        return self.shape, self._den, flat

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self._den == other._den
            and self._rows == other._rows
        )

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return f"ExactMatrix(shape={self.shape}, nnz={self.nnz}, den_bits={self._den.bit_length()})"


# ==================== Elimination ====================

def _axpy(x: Dict[int, GaussianRational], y: Dict[int, GaussianRational], alpha: GaussianRational) -> Dict[int, GaussianRational]:
    out = dict(x)
    for k, v in y.items():
        value = out.get(k)
        value = alpha * v if value is None else value + alpha * v
        if value.is_zero():
            out.pop(k, None)
        else:
            out[k] = value
    return out


def _gauss_jordan(
    rows: List[Dict[int, GaussianRational]],
    n_cols: int,
    rhs: Optional[List[Dict[int, GaussianRational]]] = None,
    reduce_above: bool = True,
    stop_rank: Optional[int] = None,
) -> List[int]:
    """
    In-place elimination with sparsest-row pivoting; returns pivot columns.

    With reduce_above the result is reduced row echelon form; without it the
    routine is plain forward elimination (enough for rank).
    """
    n = len(rows)
    pivots = []
    r = 0
    for col in range(n_cols):
        if r == n:
            break
        candidates = [i for i in range(r, n) if col in rows[i]]
        if not candidates:
            continue
        p = min(candidates, key=lambda i: (len(rows[i]), i))
        rows[r], rows[p] = rows[p], rows[r]
        if rhs is not None:
            rhs[r], rhs[p] = rhs[p], rhs[r]
        inv_pivot = ONE / rows[r][col]
        rows[r] = {k: v * inv_pivot for k, v in rows[r].items()}
        if rhs is not None:
            rhs[r] = {k: v * inv_pivot for k, v in rhs[r].items()}
        targets = range(n) if reduce_above else range(r + 1, n)
        for i in targets:
            if i != r and col in rows[i]:
                factor = -rows[i][col]
                rows[i] = _axpy(rows[i], rows[r], factor)
                if rhs is not None:
                    rhs[i] = _axpy(rhs[i], rhs[r], factor)
        pivots.append(col)
        r += 1
        if stop_rank is not None and r >= stop_rank:
            break
    return pivots


def exact_inverse(matrix: ExactMatrix) -> ExactMatrix:
    """
    Exact inverse by pivoted Gauss-Jordan elimination over the Gaussian rationals

    Raises:
        DimensionError: non-square input
        SingularMatrixError: an exact zero pivot with no row exchange available
    """
    if not matrix.is_square():
        raise DimensionError(f"exact_inverse needs a square matrix, got {matrix.shape}")
    n = matrix.n_rows
    rows = matrix.scalar_rows()
    rhs = [{i: ONE} for i in range(n)]
    pivots = _gauss_jordan(rows, n, rhs)
    if len(pivots) < n:
        raise SingularMatrixError(
            f"Matrix is exactly singular (rank {len(pivots)} < {n})"
        )
    return ExactMatrix.from_scalar_rows(n, rhs)


def exact_solve(matrix: ExactMatrix, rhs_vector: ExactMatrix) -> ExactMatrix:
    """Solve A x = b exactly for a nonsingular A and a column vector b"""
    if not matrix.is_square() or rhs_vector.shape != (matrix.n_rows, 1):
        raise DimensionError(f"Cannot solve {matrix.shape} system with rhs {rhs_vector.shape}")
    n = matrix.n_rows
    rows = matrix.scalar_rows()
    rhs = rhs_vector.scalar_rows()
    pivots = _gauss_jordan(rows, n, rhs)
    if len(pivots) < n:
        raise SingularMatrixError(f"System is exactly singular (rank {len(pivots)} < {n})")
    return ExactMatrix.from_scalar_rows(1, rhs)


def exact_rank(matrix: ExactMatrix, stop_at: Optional[int] = None) -> int:
    """Exact rank; with stop_at the count stops once it reaches that value"""
    rows = matrix.scalar_rows()
    return len(_gauss_jordan(rows, matrix.n_cols, reduce_above=False, stop_rank=stop_at))


def trace_row(dim: int) -> ExactMatrix:
    """The trace functional <<1| as a 1 x d^2 row"""
    return ExactMatrix.identity(dim).vectorize().transpose()


def exact_null_vector(liouvillian: ExactMatrix, dim: int) -> ExactMatrix:
    """
    Exact unit-trace kernel state of a trace-annihilating generator

    Row 0 of the generator (a diagonal index, hence linearly dependent on the
    other diagonal rows) is replaced by the trace functional, so the system
    is nonsingular exactly when the kernel is one-dimensional.

    Raises:
        DegeneracyError: kernel dimension differs from one
    """
    n = liouvillian.n_rows
    if n != dim * dim or not liouvillian.is_square():
        raise DimensionError(f"Generator of shape {liouvillian.shape} does not act on d={dim}")
    rows = liouvillian.scalar_rows()
    rows[0] = {j * dim + j: ONE for j in range(dim)}
    rhs = [{} for _ in range(n)]
    rhs[0] = {0: ONE}
    pivots = _gauss_jordan(rows, n, rhs)
    if len(pivots) < n:
        raise DegeneracyError(
            f"Steady state is not unique: kernel dimension {n - len(pivots) + 1} at exact precision"
        )
    return ExactMatrix.from_scalar_rows(1, rhs).unvectorize(dim)
