"""
Tests for TT tensors, TT matrices, rounding, maxvol and cross interpolation.
"""

import numpy as np
import pytest

from spacetime_tt.errors import NonFiniteError, RankDeficiencyError, ShapeMismatchError, SizeCapExceeded
from spacetime_tt.problems import burgers3d, burgers_exact
from spacetime_tt.tt_core import (
    TTTensor,
    compression_ratio,
    cross_interpolate,
    maxvol,
    tt_add,
    tt_cross,
    tt_diag,
    tt_dot,
    tt_evaluate,
    tt_from_dense,
    tt_hadamard,
    tt_identity,
    tt_kron,
    tt_matmat,
    tt_matrix_round,
    tt_matrix_to_dense,
    tt_matvec,
    tt_norm,
    tt_ones,
    tt_random,
    tt_round,
    tt_scale,
    tt_sum,
    tt_to_dense,
    tt_zeros,
)


class TestTTTensor:
    """Test construction, properties and conversions."""

    def test_properties(self, random_tt):
        """Test mode sizes, interior ranks and storage size."""
        assert random_tt.ndim == 4
        assert random_tt.mode_sizes == (5, 6, 4, 7)
        assert random_tt.ranks == (3, 4, 2)
        assert random_tt.size == 5 * 3 + 3 * 6 * 4 + 4 * 4 * 2 + 2 * 7

    def test_inconsistent_ranks(self):
        """Test neighbouring cores must agree on the shared rank."""
        with pytest.raises(ShapeMismatchError):
            TTTensor((np.ones((1, 3, 2)), np.ones((3, 3, 1))))

    def test_boundary_ranks(self):
        """Test the first and last ranks must be 1."""
        with pytest.raises(ShapeMismatchError):
            TTTensor((np.ones((2, 3, 1)),))

    def test_dense_round_trip(self, random_tt):
        """Test TT-SVD of a low-rank array recovers it with no larger ranks."""
        dense = tt_to_dense(random_tt)
        x = tt_from_dense(dense, 1e-12)
        np.testing.assert_allclose(tt_to_dense(x), dense, atol=1e-11 * np.abs(dense).max())
        assert all(r <= s for r, s in zip(x.ranks, random_tt.ranks))

    def test_from_dense_accuracy(self, rng):
        """Test truncated TT-SVD meets its relative accuracy."""
        dense = rng.standard_normal((6, 5, 4, 6))
        for eps in (0.5, 0.1, 1e-3):
            x = tt_from_dense(dense, eps)
            assert np.linalg.norm(tt_to_dense(x) - dense) <= eps * np.linalg.norm(dense) * (1 + 1e-10)

    def test_evaluate_matches_dense(self, random_tt, rng):
        """Test elementwise evaluation at random multi-indices."""
        dense = tt_to_dense(random_tt)
        indices = np.column_stack([rng.integers(n, size=50) for n in random_tt.mode_sizes])
        np.testing.assert_allclose(tt_evaluate(random_tt, indices), dense[tuple(indices.T)], rtol=1e-12)

    def test_dense_size_cap(self, random_tt):
        """Test densification beyond the cap is refused."""
        with pytest.raises(SizeCapExceeded):
            tt_to_dense(random_tt, size_cap=100)

    def test_constructors(self):
        """Test ones, zeros and their dense values."""
        assert np.all(tt_to_dense(tt_ones((2, 3, 4))) == 1.0)
        assert tt_norm(tt_zeros((2, 3))) == 0.0

    def test_compression_ratio(self):
        """Test CR is stored entries over full entries."""
        assert compression_ratio(tt_ones((10, 10, 10))) == pytest.approx(30 / 1000)


class TestArithmetic:
    """Test TT arithmetic against dense arithmetic."""

    def test_add_scale_sub(self, random_tt, rng):
        """Test sums, scaling and differences."""
        other = tt_random(random_tt.mode_sizes, (2, 2, 2), rng)
        a, b = tt_to_dense(random_tt), tt_to_dense(other)
        np.testing.assert_allclose(tt_to_dense(tt_add(random_tt, other)), a + b, atol=1e-12)
        np.testing.assert_allclose(tt_to_dense(random_tt - 2.0 * other), a - 2.0 * b, atol=1e-12)
        np.testing.assert_allclose(tt_to_dense(-tt_scale(random_tt, 3.0)), -3.0 * a, atol=1e-12)
        assert tt_add(random_tt, other).ranks == (5, 6, 4)

    def test_hadamard(self, random_tt, rng):
        """Test the elementwise product and its rank growth."""
        other = tt_random(random_tt.mode_sizes, (2, 2, 2), rng)
        product = tt_hadamard(random_tt, other)
        np.testing.assert_allclose(
            tt_to_dense(product), tt_to_dense(random_tt) * tt_to_dense(other), atol=1e-12
        )
        assert product.ranks == (6, 8, 4)

    def test_dot_and_norm(self, random_tt, rng):
        """Test the inner product and the norm."""
        other = tt_random(random_tt.mode_sizes, (2, 3, 2), rng)
        a, b = tt_to_dense(random_tt), tt_to_dense(other)
        assert tt_dot(random_tt, other) == pytest.approx(float(np.sum(a * b)), rel=1e-12)
        assert tt_norm(random_tt) == pytest.approx(float(np.linalg.norm(a)), rel=1e-12)

    def test_mode_mismatch(self, random_tt):
        """Test operands over different index boxes are rejected."""
        with pytest.raises(ShapeMismatchError):
            tt_add(random_tt, tt_ones((5, 6, 4, 6)))

    def test_sum_rounds(self, random_tt):
        """Test tt_sum of identical terms keeps the rank of one term."""
        total = tt_sum([random_tt, random_tt, random_tt], 1e-12)
        np.testing.assert_allclose(tt_to_dense(total), 3.0 * tt_to_dense(random_tt), atol=1e-10)
        assert all(r <= s for r, s in zip(total.ranks, random_tt.ranks))


class TestRounding:
    """Test TT rounding."""

    @pytest.mark.parametrize("eps", [1e-2, 1e-5, 1e-9])
    def test_error_bound_on_random_tensors(self, eps, rng):
        """Test ||x - round(x, eps)|| <= eps ||x|| on 1000 random tensors."""
        for _ in range(1000):
            x = tt_add(
                tt_random((3, 4, 4, 3), (3, 4, 3), rng, low=-1.0, high=1.0),
                tt_scale(tt_random((3, 4, 4, 3), (3, 4, 3), rng, low=-1.0, high=1.0), 1e-4),
            )
            rounded = tt_round(x, eps)
            norm = tt_norm(x)
            assert tt_norm(x - rounded) <= eps * norm * (1 + 1e-6) + 1e-13 * norm

    def test_removes_redundant_rank(self, random_tt):
        """Test x + x rounds back to the ranks of x."""
        doubled = tt_round(tt_add(random_tt, random_tt), 1e-12)
        assert doubled.ranks == random_tt.ranks
        np.testing.assert_allclose(tt_to_dense(doubled), 2.0 * tt_to_dense(random_tt), atol=1e-10)

    def test_max_rank(self, rng):
        """Test the rank cap binds."""
        x = tt_random((6, 6, 6, 6), (5, 5, 5), rng)
        assert max(tt_round(x, 0.0, max_rank=2).ranks) <= 2

    def test_negative_tolerance(self, random_tt):
        """Test a negative tolerance is rejected."""
        with pytest.raises(ValueError):
            tt_round(random_tt, -1.0)


class TestTTMatrix:
    """Test TT matrices against explicit Kronecker products."""

    def test_kron_to_dense(self, rng):
        """Test a rank-1 TT matrix densifies to np.kron of its factors."""
        factors = [rng.standard_normal((3, 4)), rng.standard_normal((2, 2)), rng.standard_normal((4, 3))]
        a = tt_kron(factors, scale=2.0)
        expected = 2.0 * np.kron(np.kron(factors[0], factors[1]), factors[2])
        np.testing.assert_allclose(tt_matrix_to_dense(a), expected, atol=1e-12)
        assert a.row_sizes == (3, 2, 4)
        assert a.col_sizes == (4, 2, 3)

    def test_matvec(self, rng):
        """Test the matrix-vector product."""
        factors = [rng.standard_normal((4, 5)), rng.standard_normal((3, 6))]
        x = tt_random((5, 6), (3,), rng)
        y = tt_matvec(tt_kron(factors), x)
        expected = np.kron(factors[0], factors[1]) @ tt_to_dense(x).ravel()
        np.testing.assert_allclose(tt_to_dense(y).ravel(), expected, atol=1e-12)

    def test_operator_algebra(self, rng):
        """Test sums, scaling and products of TT matrices."""
        a = tt_kron([rng.standard_normal((3, 3)), rng.standard_normal((4, 4))])
        b = tt_kron([rng.standard_normal((3, 3)), rng.standard_normal((4, 4))])
        da, db = tt_matrix_to_dense(a), tt_matrix_to_dense(b)
        np.testing.assert_allclose(tt_matrix_to_dense(a + b), da + db, atol=1e-12)
        np.testing.assert_allclose(tt_matrix_to_dense(a - 0.5 * b), da - 0.5 * db, atol=1e-12)
        np.testing.assert_allclose(tt_matrix_to_dense(tt_matmat(a, b)), da @ db, atol=1e-10)
        np.testing.assert_allclose(tt_matrix_to_dense(tt_matrix_round(a + a, 1e-12)), 2 * da, atol=1e-10)

    def test_identity_and_diag(self, random_tt):
        """Test the identity and diagonal lifts act as expected."""
        eye = tt_identity(random_tt.mode_sizes)
        np.testing.assert_allclose(tt_to_dense(eye.matvec(random_tt)), tt_to_dense(random_tt), atol=1e-12)
        squared = tt_diag(random_tt).matvec(random_tt, eps=1e-12)
        np.testing.assert_allclose(tt_to_dense(squared), tt_to_dense(random_tt) ** 2, atol=1e-10)

    def test_matvec_shape_mismatch(self, random_tt):
        """Test a nonconforming operand is rejected."""
        with pytest.raises(ShapeMismatchError):
            tt_matvec(tt_identity((5, 6, 4, 6)), random_tt)


class TestMaxvol:
    """Test the dominant-submatrix search."""

    def test_dominance(self, rng):
        """Test every coefficient of m @ inv(m[rows]) is bounded by 1 + tol."""
        m = rng.standard_normal((100, 6))
        rows = maxvol(m, tol=0.01)
        assert len(set(rows.tolist())) == 6
        coeffs = m @ np.linalg.inv(m[rows])
        assert np.max(np.abs(coeffs)) <= 1.01 + 1e-10
        np.testing.assert_allclose(coeffs[rows], np.eye(6), atol=1e-10)

    def test_square_matrix(self, rng):
        """Test a square matrix selects all rows."""
        rows = maxvol(rng.standard_normal((4, 4)))
        assert sorted(rows.tolist()) == [0, 1, 2, 3]

    def test_rank_deficient(self, rng):
        """Test a matrix without full column rank is rejected."""
        col = rng.standard_normal((20, 1))
        with pytest.raises(RankDeficiencyError):
            maxvol(np.hstack([col, 2.0 * col]))

    def test_wide_matrix(self, rng):
        """Test more columns than rows is rejected."""
        with pytest.raises(ValueError):
            maxvol(rng.standard_normal((3, 5)))


def _index_sum_sine(indices):
    return np.sin(0.3 * indices.sum(axis=1) + 0.1)


class TestCrossInterpolation:
    """Test rank-adaptive cross interpolation."""

    def test_low_rank_function_exhaustive(self):
        """Test a rank-2 function on a small box is recovered everywhere."""
        sizes = (8, 8, 8, 8)
        result = cross_interpolate(_index_sum_sine, sizes, 1e-10)
        assert result.converged
        assert result.validation_error <= 1e-10
        dense = _index_sum_sine(np.indices(sizes).reshape(4, -1).T).reshape(sizes)
        np.testing.assert_allclose(tt_to_dense(result.tensor), dense, atol=1e-9)
        assert max(tt_round(result.tensor, 1e-10).ranks) <= 2

    def test_smooth_function_on_large_box(self, rng):
        """Test accuracy on random entries outside the validation set."""
        sizes = (12, 12, 12, 12)
        f = lambda idx: 1.0 / (1.0 + 0.1 * idx.sum(axis=1))
        result = cross_interpolate(f, sizes, 1e-8)
        assert result.converged
        samples = np.column_stack([rng.integers(n, size=500) for n in sizes])
        values = f(samples)
        assert np.linalg.norm(tt_evaluate(result.tensor, samples) - values) <= 1e-6 * np.linalg.norm(values)

    def test_burgers_solution_on_chebyshev_grid(self):
        """Test the Burgers exact solution on a 12^4 space-time grid is reproduced to 1e-7."""
        grids = burgers3d().build_grids(12)
        nodes = [grid.nodes for grid in grids]
        f = lambda idx: burgers_exact(*(axis[idx[:, k]] for k, axis in enumerate(nodes)))
        result = cross_interpolate(f, (12, 12, 12, 12), 1e-8)
        dense = burgers_exact(*np.meshgrid(*nodes, indexing="ij"))
        error = np.linalg.norm(tt_to_dense(result.tensor) - dense)
        assert error <= 1e-7 * np.linalg.norm(dense)

    def test_zero_function(self):
        """Test an identically zero function returns the zero tensor."""
        result = cross_interpolate(lambda idx: np.zeros(len(idx)), (5, 5, 5), 1e-8)
        assert result.converged
        assert tt_norm(result.tensor) == 0.0

    def test_norm_floor_resolves_noise_absolutely(self):
        """Test a tiny full-rank field is accepted against the absolute floor."""
        weights = np.array([1, 7, 13, 29])
        noise = lambda idx: 1e-14 * np.sin(1e3 * (idx @ weights))
        result = cross_interpolate(noise, (6, 6, 6, 6), 1e-6, norm_floor=1.0)
        assert result.converged
        assert result.tensor.ranks == (1, 1, 1)

    def test_nonfinite_values(self):
        """Test NaN entries abort the interpolation."""
        with pytest.raises(NonFiniteError):
            cross_interpolate(lambda idx: np.full(len(idx), np.nan), (4, 4, 4), 1e-6)

    def test_wrong_output_length(self):
        """Test an evaluator returning the wrong number of values is rejected."""
        with pytest.raises(ShapeMismatchError):
            cross_interpolate(lambda idx: np.zeros(len(idx) + 1), (4, 4, 4), 1e-6)

    def test_deterministic_for_seed(self):
        """Test equal seeds give identical interpolants."""
        a = tt_cross(_index_sum_sine, (10, 10, 10, 10), 1e-8, seed=3)
        b = tt_cross(_index_sum_sine, (10, 10, 10, 10), 1e-8, seed=3)
        for ca, cb in zip(a.cores, b.cores):
            np.testing.assert_array_equal(ca, cb)
