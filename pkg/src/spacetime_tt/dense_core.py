"""
Dense Core - matrix-free Kronecker operators and Krylov solves on full grids.

Space-time operators are Kronecker products of one-dimensional matrices.
They are applied as mode contractions, so no (N+1)^4 x (N+1)^4 matrix is ever formed.
Fields are plain ``numpy`` arrays indexed (t, x, y, z), flattened in C order
(t slowest, z fastest).
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import NonFiniteError, ShapeMismatchError

logger = logging.getLogger(__name__)

# Configuration constants
DEFAULT_RESTART = 50
DEFAULT_MAX_ITER = 1000

DenseField = np.ndarray
FieldOperator = Callable[[np.ndarray], np.ndarray]


def as_field(values: Any, shape: Optional[Sequence[int]] = None, name: str = "field") -> DenseField:
    """Coerce ``values`` to a finite float array, optionally checking its shape.

    Raises:
        ShapeMismatchError: ``shape`` given and not matched
        NonFiniteError: NaN or Inf present
    """
    field = np.asarray(values, dtype=float)
    if shape is not None and field.shape != tuple(shape):
        raise ShapeMismatchError(shape, field.shape, name)
    if not np.all(np.isfinite(field)):
        raise NonFiniteError(name)
    return field


@dataclass(frozen=True)
class KroneckerTerm:
    """
    Scaled Kronecker product ``scale * (F_0 kron F_1 kron ...)``.

    A factor of ``None`` is the identity on that mode and costs nothing to apply.
    Factors may be rectangular (row-restricted map operators).
    """

    factors: Tuple[Optional[np.ndarray], ...]
    scale: float = 1.0

    @classmethod
    def along(cls, matrix: np.ndarray, axis: int, ndim: int = 4, scale: float = 1.0) -> "KroneckerTerm":
        """Term acting with ``matrix`` on one mode and identity elsewhere."""
        factors = [None] * ndim
        factors[axis] = np.asarray(matrix, dtype=float)
        return cls(tuple(factors), scale)

    @property
    def ndim(self) -> int:
        return len(self.factors)

    def output_shape(self, input_shape: Sequence[int]) -> Tuple[int, ...]:
        return tuple(
            n if f is None else f.shape[0] for n, f in zip(input_shape, self.factors)
        )


def mode_product(field: DenseField, matrix: np.ndarray, axis: int) -> DenseField:
    """Contract ``matrix`` with ``field`` along ``axis`` (the action of I kron M kron I)."""
    if matrix.shape[1] != field.shape[axis]:
        raise ShapeMismatchError((matrix.shape[1],), (field.shape[axis],), f"mode {axis}")
    out = np.tensordot(matrix, field, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def kron_apply(term: KroneckerTerm, field: DenseField) -> DenseField:
    """Apply a Kronecker term to a field without assembling the matrix.

    Raises:
        ShapeMismatchError: Number of factors or factor columns do not conform
    """
    field = np.asarray(field, dtype=float)
    if field.ndim != term.ndim:
        raise ShapeMismatchError((term.ndim,), (field.ndim,), "field dimensionality")
    out = field
    for axis, factor in enumerate(term.factors):
        if factor is not None:
            out = mode_product(out, factor, axis)
    if term.scale != 1.0:
        out = term.scale * out
    return out


def pointwise_scale(weights: DenseField, field: DenseField) -> DenseField:
    """Elementwise product, the action of ``diag(weights)``."""
    weights = np.asarray(weights, dtype=float)
    field = np.asarray(field, dtype=float)
    if weights.shape != field.shape:
        raise ShapeMismatchError(weights.shape, field.shape, "pointwise weights")
    return weights * field


@dataclass
class KrylovResult:
    """Outcome of a Krylov solve.

    Attributes:
        solution: Best iterate (array or TT tensor)
        iterations: Inner iterations performed
        converged: True if the relative residual met the tolerance
        residual_norm: Relative residual ``||A x - b|| / ||b||`` of ``solution``
    """

    solution: Any
    iterations: int
    converged: bool
    residual_norm: float


def krylov_solve(
    apply: FieldOperator,
    rhs: DenseField,
    tol: float,
    max_iter: int = DEFAULT_MAX_ITER,
    restart: int = DEFAULT_RESTART,
) -> KrylovResult:
    """
    Solve ``apply(x) = rhs`` with restarted GMRES.

    Args:
        apply: Linear operator acting on fields shaped like ``rhs``
        rhs: Right-hand side field
        tol: Relative residual tolerance, positive
        max_iter: Cap on inner iterations
        restart: Krylov subspace size between restarts

    Returns:
        KrylovResult; ``converged`` is False when the tolerance was not met,
        in which case ``solution`` is the last iterate
    """
    if tol <= 0:
        raise ValueError(f"Krylov tolerance must be positive, got {tol}")
    rhs = np.asarray(rhs, dtype=float)
    shape = rhs.shape
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return KrylovResult(np.zeros(shape), 0, True, 0.0)

    operator = LinearOperator(
        (rhs.size, rhs.size),
        matvec=lambda v: np.asarray(apply(v.reshape(shape)), dtype=float).ravel(),
        dtype=float,
    )
    counter = {"iterations": 0}

    def _count(_):
        counter["iterations"] += 1

    restart = max(1, min(restart, rhs.size))
    x, info = gmres(
        operator,
        rhs.ravel(),
        rtol=tol,
        atol=0.0,
        restart=restart,
        maxiter=max(1, math.ceil(max_iter / restart)),
        callback=_count,
        callback_type="pr_norm",
    )
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("Krylov iterate")

    solution = x.reshape(shape)
    residual = float(np.linalg.norm(apply(solution) - rhs)) / rhs_norm
    converged = residual <= tol
    if not converged:
        logger.warning(
            f"GMRES stopped after {counter['iterations']} iterations "
            f"(info={info}) with relative residual {residual:.3e} > {tol:.3e}"
        )
    return KrylovResult(solution, counter["iterations"], converged, residual)
