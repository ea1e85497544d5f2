import numpy as np
import pytest
import scipy.linalg

from kgcn.errors import ShapeError
from kgcn.graph import diffusion, erdos_renyi
from kgcn.krylov import (
    block_krylov_matrix,
    classical_block_inner,
    krylov_grade,
)
from kgcn.linalg import SparseMatrix, numerical_rank, spmm


def _op_from_dense(d):
    d = np.asarray(d, dtype=float)
    i, j = np.nonzero(d)
    return SparseMatrix.from_coo(d.shape[0], d.shape[1], i, j, d[i, j])


class TestBlockKrylovMatrix:
    def test_identity_operator(self):
        x = np.arange(6, dtype=float).reshape(3, 2)
        k = block_krylov_matrix(SparseMatrix.identity(3), x, 3)
        assert np.array_equal(k, np.hstack([x, x, x]))

    def test_hand_iteration(self):
        op = _op_from_dense([[0, 1], [1, 0]])
        x = np.array([[1.0], [0.0]])
        k = block_krylov_matrix(op, x, 3)
        assert k.tolist() == [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]

    def test_m_one_is_x(self):
        x = np.random.default_rng(0).standard_normal((4, 2))
        assert np.array_equal(block_krylov_matrix(SparseMatrix.identity(4), x, 1), x)

    def test_m_zero_rejected(self):
        with pytest.raises(ShapeError):
            block_krylov_matrix(SparseMatrix.identity(2), np.zeros((2, 1)), 0)

    def test_blocks_bitwise_consistent_with_spmm(self):
        g = erdos_renyi(40, 0.2, seed=1)
        op = diffusion(g, "renormalized_adjacency").matrix
        x = np.random.default_rng(1).standard_normal((40, 3))
        m = 5
        k = block_krylov_matrix(op, x, m)
        cur = x
        for j in range(m):
            assert k[:, 3 * j : 3 * (j + 1)].tobytes() == cur.tobytes()
            cur = spmm(op, cur)


class TestClassicalBlockInner:
    def test_orthonormal_columns(self):
        q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((10, 4)))
        np.testing.assert_allclose(classical_block_inner(q, q), np.eye(4), atol=1e-13)

    def test_transpose_symmetry(self):
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((8, 3)), rng.standard_normal((8, 3))
        np.testing.assert_allclose(
            classical_block_inner(x, y), classical_block_inner(y, x).T, atol=1e-14
        )

    def test_full_rank_positive_definite(self):
        x = np.random.default_rng(2).standard_normal((20, 5))
        gram = classical_block_inner(x, x)
        assert np.all(np.linalg.eigvalsh(gram) > 0)
        scipy.linalg.cholesky(gram)  # raises if not positive definite

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            classical_block_inner(np.zeros((3, 2)), np.zeros((4, 2)))


class TestKrylovGrade:
    def test_identity_operator(self):
        x = np.random.default_rng(0).standard_normal((5, 2))
        g = krylov_grade(SparseMatrix.identity(5), x, max_m=4)
        assert g == (1, True)

    def test_zero_block(self):
        g = krylov_grade(SparseMatrix.identity(3), np.zeros((3, 2)), max_m=4)
        assert g == (1, True)

    def test_two_distinct_eigenvalues(self):
        # minimal polynomial degree 2 on a generic vector
        op = _op_from_dense(np.diag([1.0, 1.0, 2.0]))
        x = np.array([[1.0], [2.0], [3.0]])
        g = krylov_grade(op, x, max_m=5)
        assert g == (2, True)

    def test_not_stabilized_flag(self):
        op = _op_from_dense(np.diag([1.0, 2.0, 3.0, 4.0]))
        x = np.ones((4, 1))
        g = krylov_grade(op, x, max_m=2)
        assert g == (2, False)

    def test_rank_stable_beyond_grade(self):
        rng = np.random.default_rng(3)
        for seed in range(5):
            g = erdos_renyi(30 + seed * 10, 0.2, seed=seed)
            op = diffusion(g, "renormalized_adjacency").matrix
            x = rng.standard_normal((op.rows, 4))
            grade = krylov_grade(op, x, max_m=12)
            if not grade.stabilized:
                continue
            base = numerical_rank(block_krylov_matrix(op, x, grade.m))
            for extra in (1, 2, 3):
                k = block_krylov_matrix(op, x, grade.m + extra)
                assert numerical_rank(k) == base
