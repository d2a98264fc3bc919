"""Dense and sparse linear-algebra kernels used throughout the package.

Dense matrices are plain 2-D ``numpy.ndarray`` objects in float64;
:class:`SparseSymMatrix` stores symmetric operators (graph adjacencies and
their normalized forms) in compressed sparse row layout.  Everything here
is a pure function of its inputs: arrays handed to constructors are copied
and frozen, so values can be shared freely across threads.
"""

import numpy as np
import scipy.sparse

from .errors import DataError, ShapeError

__all__ = [
    "SparseSymMatrix",
    "as_dense",
    "matmul",
    "spmm",
    "relu",
    "softmax_rows",
    "hadamard",
]

# Value tolerance when checking that a sparse matrix is symmetric.
SYMMETRY_TOL = 1e-12


def as_dense(a, name="matrix"):
    """Coerce ``a`` to a 2-D float64 array, raising ShapeError otherwise."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {out.shape}")
    return out


def matmul(a, b):
    """Dense matrix product ``a @ b``."""
    a = as_dense(a, "left operand")
    b = as_dense(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ")
    return a @ b


def relu(a):
    """Elementwise max(0, x); negative zeros come out as +0.0."""
    return np.maximum(as_dense(a), 0.0)


def softmax_rows(a):
    """Row-wise softmax with per-row max subtraction for overflow safety."""
    a = as_dense(a)
    shifted = a - a.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def hadamard(a, b):
    """Elementwise product of two equally shaped matrices."""
    a = as_dense(a, "left operand")
    b = as_dense(b, "right operand")
    if a.shape != b.shape:
        raise ShapeError(f"hadamard operands differ in shape: {a.shape} vs {b.shape}")
    return a * b


def spmm(s, b):
    """Sparse-dense product ``s @ b`` for a symmetric sparse operator."""
    if not isinstance(s, SparseSymMatrix):
        raise ShapeError("spmm expects a SparseSymMatrix on the left")
    b = as_dense(b, "right operand")
    if s.dim != b.shape[0]:
        raise ShapeError(f"cannot multiply sparse ({s.dim}, {s.dim}) by {b.shape}")
    return s.scipy() @ b


class SparseSymMatrix:
    """Symmetric sparse matrix in CSR form.

    Structure is validated on construction: column indices strictly
    increasing within each row, the nonzero pattern symmetric, paired
    values equal within ``SYMMETRY_TOL``, and every value finite.  The
    underlying arrays are frozen after validation.
    """

    __slots__ = ("dim", "indptr", "indices", "data", "_csr")

    def __init__(self, dim, indptr, indices, data, validate=True):
        self.dim = int(dim)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self._csr = None
        if validate:
            self._validate()
        for arr in (self.indptr, self.indices, self.data):
            arr.setflags(write=False)

    def _validate(self):
        n = self.dim
        if n < 0:
            raise ShapeError("dimension must be nonnegative")
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise DataError("malformed CSR row offsets")
        if np.any(np.diff(self.indptr) < 0):
            raise DataError("CSR row offsets must be nondecreasing")
        if len(self.indices) != len(self.data):
            raise DataError("CSR index and value arrays differ in length")
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= n):
            raise DataError("CSR column index out of range")
        for i in range(n):
            row = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise DataError(f"column indices not strictly increasing in row {i}")
        if not np.all(np.isfinite(self.data)):
            raise DataError("sparse matrix contains non-finite values")
        # Symmetry: identical pattern under transpose and matching values.
        t = self.scipy().T.tocsr()
        t.sort_indices()
        if not (np.array_equal(t.indptr, self.indptr) and np.array_equal(t.indices, self.indices)):
            raise DataError("sparse matrix pattern is not symmetric")
        if t.data.size and np.max(np.abs(t.data - self.data)) > SYMMETRY_TOL:
            raise DataError("sparse matrix values are not symmetric")

    @classmethod
    def from_dense(cls, a, validate=True):
        """Build from a dense symmetric array, keeping exact nonzeros."""
        a = as_dense(a)
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"expected a square matrix, got {a.shape}")
        n = a.shape[0]
        indptr = np.zeros(n + 1, dtype=np.int64)
        cols = []
        vals = []
        for i in range(n):
            nz = np.flatnonzero(a[i])
            cols.append(nz)
            vals.append(a[i, nz])
            indptr[i + 1] = indptr[i] + len(nz)
        indices = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        data = np.concatenate(vals) if vals else np.zeros(0)
        return cls(n, indptr, indices, data, validate=validate)

    @classmethod
    def identity(cls, n):
        return cls(n, np.arange(n + 1), np.arange(n), np.ones(n), validate=False)

    @property
    def nnz(self):
        return len(self.data)

    def scipy(self):
        """The equivalent ``scipy.sparse.csr_matrix`` (cached)."""
        if self._csr is None:
            self._csr = scipy.sparse.csr_matrix(
                (self.data, self.indices, self.indptr), shape=(self.dim, self.dim)
            )
        return self._csr

    def to_dense(self):
        """Expand to a dense array by walking the CSR arrays directly."""
        out = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.data[lo:hi]
        return out

    def row_sums(self):
        sums = np.zeros(self.dim)
        rows = np.repeat(np.arange(self.dim), np.diff(self.indptr))
        np.add.at(sums, rows, self.data)
        return sums

    def __repr__(self):
        return f"SparseSymMatrix(dim={self.dim}, nnz={self.nnz})"
