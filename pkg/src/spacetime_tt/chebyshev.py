"""
Chebyshev Grids - Gauss-Lobatto nodes and spectral differentiation matrices.

Every space-time operator of the solver is assembled from the one-dimensional
matrices built here.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

# Configuration constants
CANONICAL_INTERVAL = (-1.0, 1.0)
MIN_POINTS = 2


@dataclass(frozen=True)
class ChebyshevGrid1D:
    """
    Chebyshev-Gauss-Lobatto grid on an interval with its derivative matrices.

    Nodes are stored in ascending order with ``nodes[0] == a`` and
    ``nodes[-1] == b``. ``d1`` maps nodal values to nodal first derivatives,
    ``d2`` is ``d1 @ d1``.
    """

    n_points: int
    interval: Tuple[float, float] = CANONICAL_INTERVAL
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    d1: np.ndarray = field(init=False, repr=False, compare=False)
    d2: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        interval = (float(self.interval[0]), float(self.interval[1]))
        object.__setattr__(self, "interval", interval)
        object.__setattr__(self, "nodes", gauss_lobatto_nodes(self.n_points, interval))
        d1 = differentiation_matrix(self)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", second_derivative_matrix(d1))

    @property
    def degree(self) -> int:
        return self.n_points - 1

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]


def _check_grid_args(n_points: int, interval: Tuple[float, float]) -> None:
    if int(n_points) != n_points or n_points < MIN_POINTS:
        raise ValueError(f"A Gauss-Lobatto grid needs at least {MIN_POINTS} points, got {n_points}")
    a, b = interval
    if not np.isfinite(a) or not np.isfinite(b) or not a < b:
        raise ValueError(f"Degenerate interval [{a}, {b}]")


def _canonical_nodes(n_points: int) -> np.ndarray:
    # sin form of cos(pi (N - j) / N): exact endpoints, exact midpoint, exact symmetry
    degree = n_points - 1
    j = np.arange(n_points)
    return np.sin(np.pi * (2 * j - degree) / (2 * degree))


def gauss_lobatto_nodes(n_points: int, interval: Tuple[float, float] = CANONICAL_INTERVAL) -> np.ndarray:
    """Ascending Chebyshev-Gauss-Lobatto nodes mapped affinely onto ``interval``.

    Args:
        n_points: Number of nodes (polynomial degree plus one), at least 2
        interval: Pair ``(a, b)`` with ``a < b``

    Returns:
        Array of ``n_points`` strictly increasing nodes with exact endpoints

    Raises:
        ValueError: Fewer than two points or a degenerate interval
    """
    _check_grid_args(n_points, interval)
    a, b = float(interval[0]), float(interval[1])
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid + half * _canonical_nodes(n_points)
    nodes[0], nodes[-1] = a, b
    return nodes


def differentiation_matrix(grid: ChebyshevGrid1D) -> np.ndarray:
    """First-derivative collocation matrix ``S_x`` of a grid.

    Closed-form Gauss-Lobatto off-diagonal entries, diagonal set by the
    negative-sum rule so every row annihilates constants. Scaled by
    ``2 / (b - a)`` for the affine map from ``[-1, 1]``.
    """
    _check_grid_args(grid.n_points, grid.interval)
    x = _canonical_nodes(grid.n_points)
    weights = np.ones(grid.n_points)
    weights[0] = weights[-1] = 2.0
    weights *= (-1.0) ** np.arange(grid.n_points)

    dx = x[:, None] - x[None, :] + np.eye(grid.n_points)
    d1 = np.outer(weights, 1.0 / weights) / dx
    np.fill_diagonal(d1, 0.0)
    d1[np.diag_indices_from(d1)] = -d1.sum(axis=1)
    return d1 * (2.0 / grid.length)


def second_derivative_matrix(d1: np.ndarray) -> np.ndarray:
    """Second-derivative matrix ``S_xx = S_x @ S_x``."""
    d1 = np.asarray(d1)
    if d1.ndim != 2 or d1.shape[0] != d1.shape[1]:
        raise ValueError(f"Derivative matrix must be square, got shape {d1.shape}")
    return d1 @ d1


def build_grids(intervals: Tuple[Tuple[float, float], ...], n_points: int) -> Tuple[ChebyshevGrid1D, ...]:
    """One grid per direction, all with ``n_points`` nodes."""
    return tuple(ChebyshevGrid1D(n_points, interval) for interval in intervals)
