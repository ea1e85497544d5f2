"""Block Krylov constructions: the Krylov matrix, block inner product, grade."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ShapeError
from .linalg import SparseMatrix, gemm, numerical_rank, spmm

__all__ = [
    "block_krylov_blocks",
    "block_krylov_matrix",
    "classical_block_inner",
    "KrylovGrade",
    "krylov_grade",
]


def block_krylov_blocks(op: SparseMatrix, x: np.ndarray, m: int) -> list[np.ndarray]:
    """[X, L X, ..., L^{m-1} X] as a list of N x F blocks.

    Powers are built by m-1 successive sparse products; L^j is never formed.
    """
    if m < 1:
        raise ShapeError(f"m must be >= 1, got {m}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or op.cols != x.shape[0]:
        raise ShapeError(f"operator {op.shape} incompatible with block {x.shape}")
    blocks = [x]
    for _ in range(m - 1):
        blocks.append(spmm(op, blocks[-1]))
    return blocks


def block_krylov_matrix(op: SparseMatrix, x: np.ndarray, m: int) -> np.ndarray:
    """Horizontal concatenation [X, L X, ..., L^{m-1} X], shape N x (m F)."""
    return np.hstack(block_krylov_blocks(op, x, m))


def classical_block_inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Classical block inner product X^T Y (an F x F matrix)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"block shapes differ: {x.shape} vs {y.shape}")
    return gemm(x.T, y)


class KrylovGrade(NamedTuple):
    m: int
    stabilized: bool


def krylov_grade(
    op: SparseMatrix, x: np.ndarray, max_m: int, tol: float | None = None
) -> KrylovGrade:
    """Smallest m at which the block Krylov matrix stops gaining rank.

    Rank stabilization (rank K_{m+1} == rank K_m under the numerical-rank
    tolerance) stands in for exact span equality. If the rank keeps growing
    through max_m the result carries stabilized=False.
    """
    if max_m < 1:
        raise ShapeError(f"max_m must be >= 1, got {max_m}")
    blocks = block_krylov_blocks(op, x, 1)
    rank = numerical_rank(blocks[0], tol)
    for m in range(1, max_m + 1):
        blocks.append(spmm(op, blocks[-1]))
        next_rank = numerical_rank(np.hstack(blocks), tol)
        if next_rank == rank:
            return KrylovGrade(m, True)
        rank = next_rank
    return KrylovGrade(max_m, False)
