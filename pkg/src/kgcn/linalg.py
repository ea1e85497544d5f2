"""Dense and sparse kernels, numerical rank, and symmetric eigensolvers.

Dense matrices are plain 2-D float64 ``numpy.ndarray`` objects throughout the
package. Sparse symmetric operators are carried by :class:`SparseMatrix`, a
canonical CSR container (sorted column indices per row, no stored zeros),
which makes bitwise symmetry checks meaningful.

Dense products delegate to BLAS via numpy; sparse-dense products to scipy's
CSR kernels, which accumulate each output row over the stored entries in
ascending column order. Both are run-to-run deterministic for a fixed
thread configuration; the CLI pins the thread count to one in deterministic
mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import NumericalError, ShapeError, TooLarge

__all__ = [
    "SparseMatrix",
    "as_dense",
    "spmm",
    "gemm",
    "numerical_rank",
    "spectrum",
    "lanczos_ritz_values",
    "activation",
    "activation_grad",
    "ACTIVATIONS",
]


# --------------------------------------------------------------------------
# sparse container
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """CSR matrix with canonical storage.

    row_ptr is monotone of length rows+1; col_idx is strictly increasing
    within each row; values holds no explicit zeros.
    """

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.row_ptr.shape != (self.rows + 1,):
            raise ShapeError("row_ptr length must be rows+1")
        if self.col_idx.shape != self.values.shape:
            raise ShapeError("col_idx and values must have equal length")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ShapeError("row_ptr must be monotone")

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        m = scipy.sparse.csr_matrix(m)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(
            rows=int(m.shape[0]),
            cols=int(m.shape[1]),
            row_ptr=np.asarray(m.indptr, dtype=np.int64),
            col_idx=np.asarray(m.indices, dtype=np.int64),
            values=np.asarray(m.data, dtype=np.float64),
        )

    @classmethod
    def from_coo(cls, rows, cols, i, j, v) -> "SparseMatrix":
        m = scipy.sparse.coo_matrix((v, (i, j)), shape=(rows, cols))
        return cls.from_scipy(m)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls.from_scipy(scipy.sparse.identity(n, format="csr"))

    def to_scipy(self) -> scipy.sparse.csr_matrix:
        # wraps the same buffers, no copy
        return scipy.sparse.csr_matrix(
            (self.values, self.col_idx, self.row_ptr), shape=(self.rows, self.cols)
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_scipy(self.to_scipy().transpose().tocsr())

    def is_bitwise_symmetric(self) -> bool:
        if self.rows != self.cols:
            return False
        t = self.transpose()
        return (
            self.row_ptr.tobytes() == t.row_ptr.tobytes()
            and self.col_idx.tobytes() == t.col_idx.tobytes()
            and self.values.tobytes() == t.values.tobytes()
        )


def as_dense(x, name: str = "matrix") -> np.ndarray:
    """Validate external input as a finite 2-D float64 array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{name} contains NaN or Inf")
    return a


# --------------------------------------------------------------------------
# products
# --------------------------------------------------------------------------


def spmm(s: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse @ dense with per-row accumulation in ascending column order."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or s.cols != x.shape[0]:
        raise ShapeError(f"spmm shape mismatch: {s.shape} @ {x.shape}")
    return s.to_scipy() @ x


def gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense matrix product (BLAS)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"gemm shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


# --------------------------------------------------------------------------
# numerical rank
# --------------------------------------------------------------------------


def _singular_values(x: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(x, compute_uv=False)
    except np.linalg.LinAlgError:
        # gesdd can fail to converge on pathological input; gesvd is slower
        # but far more robust.
        try:
            return scipy.linalg.svd(x, compute_uv=False, lapack_driver="gesvd")
        except Exception as exc:  # pragma: no cover - last resort
            raise NumericalError(f"SVD did not converge: {exc}") from exc


def numerical_rank(x: np.ndarray, tol: float | None = None) -> int:
    """Count singular values above a tolerance.

    With ``tol=None`` the threshold is max(rows, cols) * eps * sigma_1,
    the usual machine-precision scaling. A zero matrix has rank 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("numerical_rank expects a 2-D array")
    if x.size == 0:
        return 0
    if not np.all(np.isfinite(x)):
        raise NumericalError("numerical_rank: input contains NaN or Inf")
    s = _singular_values(x)
    if s.size == 0 or s[0] == 0.0:
        return 0
    if tol is None:
        tol = max(x.shape) * np.finfo(np.float64).eps * s[0]
    return int(np.count_nonzero(s > tol))


# --------------------------------------------------------------------------
# symmetric spectrum
# --------------------------------------------------------------------------

DENSE_EIG_LIMIT = 5000


def lanczos_ritz_values(
    s: SparseMatrix,
    k: int,
    iters: int,
    seed: int = 0,
    return_all: bool = False,
) -> np.ndarray:
    """Ritz values of a symmetric operator from a Lanczos run.

    Runs ``iters`` steps with full reorthogonalization from a seeded random
    start vector, then eigendecomposes the tridiagonal projection. Returns
    the ``k`` Ritz values closest to the two ends of the spectrum (or all
    ``iters`` of them with ``return_all``), sorted ascending.
    """
    n = s.rows
    if s.rows != s.cols:
        raise ShapeError("lanczos requires a square operator")
    if not 1 <= iters <= n:
        raise ShapeError(f"lanczos iters must be in [1, n={n}]")
    if not 1 <= k <= iters:
        raise ShapeError("lanczos k must be in [1, iters]")

    a = s.to_scipy()
    rng = np.random.Generator(np.random.PCG64(seed))
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)

    basis = np.zeros((n, iters))
    alphas = np.zeros(iters)
    betas = np.zeros(max(iters - 1, 0))

    basis[:, 0] = q
    u = a @ q
    alphas[0] = q @ u
    for i in range(1, iters):
        r = u - alphas[i - 1] * basis[:, i - 1]
        if i > 1:
            r -= betas[i - 2] * basis[:, i - 2]
        # full reorthogonalization against every previous vector
        r -= basis[:, :i] @ (basis[:, :i].T @ r)
        beta = np.linalg.norm(r)
        if beta <= n * np.finfo(np.float64).eps * max(1.0, np.abs(alphas[: i]).max()):
            raise NumericalError(
                f"Lanczos breakdown at step {i}: invariant subspace reached"
            )
        betas[i - 1] = beta
        q = r / beta
        basis[:, i] = q
        u = a @ q
        alphas[i] = q @ u

    ritz = scipy.linalg.eigh_tridiagonal(alphas, betas, eigvals_only=True)
    ritz = np.sort(ritz)
    if return_all or k == iters:
        return ritz
    lo = k // 2
    hi = k - lo
    return np.sort(np.concatenate([ritz[:lo], ritz[iters - hi :]]))


def spectrum(
    s: SparseMatrix,
    method: str = "dense_full",
    k: int | None = None,
    iters: int | None = None,
    seed: int = 0,
    return_vectors: bool = False,
):
    """Eigenvalues of a symmetric operator, sorted ascending.

    ``dense_full`` runs a dense symmetric eigensolver and is refused above
    ``DENSE_EIG_LIMIT`` nodes. ``lanczos`` returns ``k`` Ritz values from an
    ``iters``-step fully reorthogonalized Lanczos run, approximating the
    extremal eigenvalues. Eigenvectors are only available on the dense path.
    """
    if s.rows != s.cols:
        raise ShapeError("spectrum requires a square operator")
    if method == "dense_full":
        if s.rows > DENSE_EIG_LIMIT:
            raise TooLarge(
                f"dense_full refused for N={s.rows} > {DENSE_EIG_LIMIT}; use lanczos"
            )
        if s.rows == 0:
            empty = np.zeros(0)
            return (empty, np.zeros((0, 0))) if return_vectors else empty
        dense = s.to_dense()
        if return_vectors:
            w, v = np.linalg.eigh(dense)
            return w, v
        return np.linalg.eigvalsh(dense)
    if method == "lanczos":
        if return_vectors:
            raise ShapeError("lanczos path does not return eigenvectors")
        if k is None or iters is None:
            raise ShapeError("lanczos requires k and iters")
        return lanczos_ritz_values(s, k=k, iters=iters, seed=seed)
    raise ShapeError(f"unknown spectrum method {method!r}")


# --------------------------------------------------------------------------
# activations
# --------------------------------------------------------------------------

ACTIVATIONS = ("relu", "tanh", "identity")


def activation(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "identity":
        return np.asarray(x, dtype=np.float64)
    raise ShapeError(f"unknown activation {kind!r}")


def activation_grad(x: np.ndarray, kind: str) -> np.ndarray:
    """Element-wise derivative evaluated at the pre-activation x."""
    if kind == "relu":
        return np.where(x > 0, 1.0, 0.0)
    if kind == "tanh":
        t = np.tanh(x)
        return 1.0 - t * t
    if kind == "identity":
        return np.ones_like(x, dtype=np.float64)
    raise ShapeError(f"unknown activation {kind!r}")
