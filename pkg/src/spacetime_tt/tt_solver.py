"""
TT Solver - tensor-train form of the space-time collocation system.

The reduced system lives on the interior block of the grid, of shape
(n - 1, n - 2, n - 2, n - 2). Constant operators are rank-1 Kronecker TT matrices
restricted to interior rows and columns; the boundary data enter through
row-restricted, column-full map operators applied once to the boundary tensor.
Newton iterates are kept low-rank by rounding every candidate at an adaptive
tolerance eps_k (step truncation).
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .chebyshev import ChebyshevGrid1D
from .dense_core import KrylovResult
from .errors import NonFiniteError
from .fullgrid_solver import (
    DEFAULT_MAX_NEWTON,
    DEFAULT_TOL_RES,
    DEFAULT_TOL_UPDATE,
    MAX_HALVINGS,
    IndexSplit,
    ProblemSpec,
    boundary_values,
    forcing_term,
    split_indices,
)
from .report import (
    CRITERION_MAX_ITER,
    CRITERION_RESIDUAL,
    CRITERION_UPDATE,
    CRITERION_ZERO_RESIDUAL,
    IterationRecord,
    NewtonReport,
)
from .tt_core import (
    TTMatrix,
    TTTensor,
    compression_ratio,
    cross_interpolate,
    tt_add,
    tt_diag,
    tt_dot,
    tt_evaluate,
    tt_hadamard,
    tt_kron,
    tt_matmat,
    tt_matrix_add,
    tt_matrix_round,
    tt_norm,
    tt_ones,
    tt_round,
    tt_scale,
    tt_sum,
    tt_to_dense,
    tt_zeros,
)

logger = logging.getLogger(__name__)

# Configuration constants
DEFAULT_EPS0 = 1e-1
DEFAULT_EPS_FLOOR = 1e-12
DEFAULT_EPS_CROSS = 1e-10
DEFAULT_TT_RESTART = 30
DEFAULT_TT_MAX_ITER = 150
UPDATE_FLOOR_FACTOR = 10.0
BREAKDOWN_TOL = 1e-14


# ==================== Operators ====================

@dataclass(frozen=True)
class TTOperatorSet:
    """
    Constant TT operators of the reduced system and the boundary contributions.

    ``boundary_time``, ``boundary_laplacian`` and ``boundary_gradients`` are the
    map operators applied to ``g_bc``, i.e. the boundary columns of A_t, L and
    the gradients acting on the known boundary values.
    """

    a_t: TTMatrix
    laplacian: TTMatrix
    gradients: Tuple[TTMatrix, ...]
    a_t_map: TTMatrix
    laplacian_map: TTMatrix
    gradients_map: Tuple[TTMatrix, ...]
    g_bc: TTTensor
    boundary_time: TTTensor
    boundary_laplacian: TTTensor
    boundary_gradients: Tuple[TTTensor, ...]
    source: Optional[TTTensor] = None

    @property
    def interior_sizes(self) -> Tuple[int, ...]:
        return self.a_t.row_sizes


def _restricted(matrix: np.ndarray, axis: int, full_columns: bool) -> np.ndarray:
    rows = slice(1, None) if axis == 0 else slice(1, -1)
    cols = slice(None) if full_columns else rows
    return matrix[rows, cols]


def _kron_along(grids: Sequence[ChebyshevGrid1D], axis: int, matrix: np.ndarray, full_columns: bool) -> TTMatrix:
    """Rank-1 operator with ``matrix`` on ``axis`` and (restricted) identities elsewhere."""
    factors = []
    for k, grid in enumerate(grids):
        factor = matrix if k == axis else np.eye(grid.n_points)
        factors.append(_restricted(factor, k, full_columns))
    return tt_kron(factors)


def _laplacian_of(grids: Sequence[ChebyshevGrid1D], full_columns: bool) -> TTMatrix:
    terms = [_kron_along(grids, axis, grids[axis].d2, full_columns) for axis in range(1, len(grids))]
    total = terms[0]
    for term in terms[1:]:
        total = tt_matrix_add(total, term)
    return total


def _node_evaluator(fn: Callable, grids: Sequence[ChebyshevGrid1D], offsets: Sequence[int]) -> Callable:
    """Evaluator of ``fn(t, x, y, z)`` at multi-indices shifted by ``offsets``."""
    nodes = [g.nodes for g in grids]

    def evaluate(indices: np.ndarray) -> np.ndarray:
        coords = [nodes[k][indices[:, k] + offsets[k]] for k in range(len(nodes))]
        return np.broadcast_to(np.asarray(fn(*coords), dtype=float), (indices.shape[0],))

    return evaluate


def _interior_offsets(ndim: int) -> Tuple[int, ...]:
    return (1,) * ndim


def build_boundary_tensor(
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    eps_cross: float = DEFAULT_EPS_CROSS,
    seed: Optional[int] = 0,
) -> TTTensor:
    """Full-grid TT tensor holding g on boundary nodes, h at t = 0 and 0 inside, via cross."""
    nodes = [g.nodes for g in grids]
    last = grids[0].n_points - 1

    def evaluate(indices: np.ndarray) -> np.ndarray:
        coords = [nodes[k][indices[:, k]] for k in range(len(nodes))]
        m = indices.shape[0]
        on_space_boundary = np.any((indices[:, 1:] == 0) | (indices[:, 1:] == last), axis=1)
        initial = indices[:, 0] == 0
        g = np.broadcast_to(np.asarray(problem.boundary(*coords), dtype=float), (m,))
        h = np.broadcast_to(np.asarray(problem.initial(*coords[1:]), dtype=float), (m,))
        return np.where(initial, h, np.where(on_space_boundary, g, 0.0))

    result = cross_interpolate(evaluate, [g.n_points for g in grids], eps_cross, seed=seed)
    return tt_round(result.tensor, eps_cross)


def build_tt_operators(
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    split: Optional[IndexSplit] = None,
    eps_cross: float = DEFAULT_EPS_CROSS,
    seed: Optional[int] = 0,
) -> TTOperatorSet:
    """
    Assemble the interior TT operators, the map operators and the boundary tensor.

    Args:
        problem: Problem definition
        grids: One grid per space-time direction, equal sizes
        split: Interior/boundary split (derived from the grids when omitted)
        eps_cross: Accuracy of the cross-interpolated boundary and source tensors
        seed: Seed of the cross interpolation sampler

    Returns:
        TTOperatorSet for the reduced system
    """
    split = split or split_indices(grids[0].n_points, len(grids))
    ndim = len(grids)
    d1_t = grids[0].d1

    a_t = _kron_along(grids, 0, d1_t, full_columns=False)
    laplacian = _laplacian_of(grids, full_columns=False)
    gradients = tuple(_kron_along(grids, axis, grids[axis].d1, False) for axis in range(1, ndim))

    a_t_map = _kron_along(grids, 0, d1_t, full_columns=True)
    laplacian_map = _laplacian_of(grids, full_columns=True)
    gradients_map = tuple(_kron_along(grids, axis, grids[axis].d1, True) for axis in range(1, ndim))

    g_bc = build_boundary_tensor(problem, grids, eps_cross, seed)
    boundary_time = a_t_map.matvec(g_bc, eps_cross)
    boundary_laplacian = laplacian_map.matvec(g_bc, eps_cross)
    boundary_gradients = tuple(op.matvec(g_bc, eps_cross) for op in gradients_map)

    source = None
    if problem.source is not None:
        evaluate = _node_evaluator(problem.source, grids, _interior_offsets(ndim))
        result = cross_interpolate(evaluate, split.interior_shape, eps_cross, seed=seed)
        source = tt_round(result.tensor, eps_cross)

    logger.debug(f"TT operators built: g_bc ranks {g_bc.ranks}, laplacian ranks {laplacian.ranks}")
    return TTOperatorSet(
        a_t=a_t,
        laplacian=laplacian,
        gradients=gradients,
        a_t_map=a_t_map,
        laplacian_map=laplacian_map,
        gradients_map=gradients_map,
        g_bc=g_bc,
        boundary_time=boundary_time,
        boundary_laplacian=boundary_laplacian,
        boundary_gradients=boundary_gradients,
        source=source,
    )


# ==================== Coefficients and residual ====================

def _is_zero(fn: Callable) -> bool:
    return isinstance(fn, Polynomial) and not np.any(fn.convert().coef)


def tt_coefficient(
    fn: Callable,
    u: TTTensor,
    eps: float,
    seed: Optional[int] = 0,
    norm_floor: float = 0.0,
) -> TTTensor:
    """
    Elementwise ``fn(u)`` in TT format, accurate to ``eps``.

    ``numpy.polynomial.Polynomial`` coefficients are evaluated exactly with
    Horner's rule in Hadamard products, rounding after each step. Any other
    vectorized callable is cross-interpolated from elements of ``u``.
    """
    if isinstance(fn, Polynomial):
        coef = np.trim_zeros(fn.convert().coef, "b")
        ones = tt_ones(u.mode_sizes)
        if coef.size == 0:
            return tt_zeros(u.mode_sizes)
        result = tt_scale(ones, coef[-1])
        for c in coef[-2::-1]:
            result = tt_hadamard(result, u)
            if c != 0.0:
                result = tt_add(result, tt_scale(ones, c))
            result = tt_round(result, eps)
        return result

    result = cross_interpolate(
        lambda indices: fn(tt_evaluate(u, indices)), u.mode_sizes, eps, seed=seed, norm_floor=norm_floor
    )
    return tt_round(result.tensor, eps)


def _linear_parts(u: TTTensor, ops: TTOperatorSet, eps: float):
    """Time derivative, Laplacian and gradients of the assembled field, on the interior."""
    time_part = tt_round(tt_add(ops.a_t.matvec(u), ops.boundary_time), eps)
    laplacian = tt_round(tt_add(ops.laplacian.matvec(u), ops.boundary_laplacian), eps)
    gradients = tuple(
        tt_round(tt_add(op.matvec(u), boundary), eps)
        for op, boundary in zip(ops.gradients, ops.boundary_gradients)
    )
    return time_part, laplacian, gradients


def tt_residual(u: TTTensor, ops: TTOperatorSet, problem: ProblemSpec, eps: float) -> TTTensor:
    """
    Residual of the reduced system in TT format, rounded at ``eps``.

    G(U) = A_t U - a(U) o L U + sum_i b_i(U) o grad_i U - f(U) - s + F_bc(U),
    where the boundary term F_bc adds the map-operator images of g_bc to each
    linear part before the coefficients multiply them.
    """
    time_part, laplacian, gradients = _linear_parts(u, ops, eps)
    terms = [time_part]
    if not _is_zero(problem.diffusion):
        a = tt_coefficient(problem.diffusion, u, eps)
        terms.append(tt_scale(tt_round(tt_hadamard(a, laplacian), eps), -1.0))
    for b, grad in zip(problem.convection, gradients):
        if not _is_zero(b):
            terms.append(tt_round(tt_hadamard(tt_coefficient(b, u, eps), grad), eps))
    if not _is_zero(problem.forcing):
        terms.append(tt_scale(tt_coefficient(problem.forcing, u, eps), -1.0))
    if ops.source is not None:
        terms.append(tt_scale(ops.source, -1.0))
    return tt_sum(terms, eps)


class TTJacobian:
    """
    Jacobian of the reduced system kept as coefficient tensors plus constant operators.

    J = A_t - diag(a) L + sum_i diag(b_i) grad_i + diag(d), with the diagonal
    d = -a'(U) o LU + sum_i b_i'(U) o grad_i U - f'(U). ``matvec`` applies the
    terms one by one with rounding; ``to_matrix`` assembles the TT matrix.
    """

    def __init__(
        self,
        ops: TTOperatorSet,
        diffusion: Optional[TTTensor],
        convection: Sequence[Optional[TTTensor]],
        diagonal: TTTensor,
    ):
        self.ops = ops
        self.diffusion = diffusion
        self.convection = tuple(convection)
        self.diagonal = diagonal

    def matvec(self, x: TTTensor, eps: Optional[float] = None) -> TTTensor:
        def _round(t: TTTensor) -> TTTensor:
            return t if eps is None else tt_round(t, eps)

        terms = [self.ops.a_t.matvec(x, eps), _round(tt_hadamard(self.diagonal, x))]
        if self.diffusion is not None:
            lap = self.ops.laplacian.matvec(x, eps)
            terms.append(tt_scale(_round(tt_hadamard(self.diffusion, lap)), -1.0))
        for b, op in zip(self.convection, self.ops.gradients):
            if b is not None:
                terms.append(_round(tt_hadamard(b, op.matvec(x, eps))))
        if eps is None:
            total = terms[0]
            for term in terms[1:]:
                total = tt_add(total, term)
            return total
        return tt_sum(terms, eps)

    def to_matrix(self, eps: float) -> TTMatrix:
        """Assembled TT matrix rounded at ``eps``."""
        terms = [self.ops.a_t, tt_diag(self.diagonal)]
        if self.diffusion is not None:
            terms.append(tt_matmat(tt_diag(tt_scale(self.diffusion, -1.0)), self.ops.laplacian))
        for b, op in zip(self.convection, self.ops.gradients):
            if b is not None:
                terms.append(tt_matmat(tt_diag(b), op))
        total = terms[0]
        for term in terms[1:]:
            total = tt_matrix_round(tt_matrix_add(total, term), eps)
        return total


def jacobian_operator(u: TTTensor, ops: TTOperatorSet, problem: ProblemSpec, eps: float) -> TTJacobian:
    """Linearization of the reduced system at ``u`` with coefficient tensors rounded at ``eps``."""
    _, laplacian, gradients = _linear_parts(u, ops, eps)
    diagonal_terms = []
    if not _is_zero(problem.diffusion_prime):
        da = tt_coefficient(problem.diffusion_prime, u, eps)
        diagonal_terms.append(tt_scale(tt_round(tt_hadamard(da, laplacian), eps), -1.0))
    for db, grad in zip(problem.convection_prime, gradients):
        if not _is_zero(db):
            diagonal_terms.append(tt_round(tt_hadamard(tt_coefficient(db, u, eps), grad), eps))
    if not _is_zero(problem.forcing_prime):
        diagonal_terms.append(tt_scale(tt_coefficient(problem.forcing_prime, u, eps), -1.0))
    diagonal = tt_sum(diagonal_terms, eps) if diagonal_terms else tt_zeros(u.mode_sizes)

    diffusion = None if _is_zero(problem.diffusion) else tt_coefficient(problem.diffusion, u, eps)
    convection = [None if _is_zero(b) else tt_coefficient(b, u, eps) for b in problem.convection]
    return TTJacobian(ops, diffusion, convection, diagonal)


def tt_jacobian(u: TTTensor, ops: TTOperatorSet, problem: ProblemSpec, eps: float) -> TTMatrix:
    """Assembled Jacobian TT matrix at ``u``, rounded at ``eps``."""
    return jacobian_operator(u, ops, problem, eps).to_matrix(eps)


# ==================== Linear solver ====================

class TTLinearOperator(Protocol):
    def matvec(self, x: TTTensor, eps: Optional[float] = None) -> TTTensor: ...


def tt_linear_solve(
    a: TTLinearOperator,
    rhs: TTTensor,
    eps: float,
    max_iter: int = DEFAULT_TT_MAX_ITER,
    restart: int = DEFAULT_TT_RESTART,
    round_eps: Optional[float] = None,
) -> KrylovResult:
    """
    Restarted GMRES with Krylov vectors in TT format.

    Every operator application and Gram-Schmidt update is rounded at
    ``round_eps`` (default ``eps / 10``); the least-squares problem on the
    Hessenberg matrix is solved densely.

    Args:
        a: TT matrix or any operator with ``matvec(x, eps)``
        rhs: Right-hand side
        eps: Relative residual tolerance
        max_iter: Cap on Arnoldi steps over all restarts
        restart: Arnoldi steps per cycle
        round_eps: Rounding tolerance of the Krylov vectors

    Returns:
        KrylovResult whose ``solution`` is a TTTensor
    """
    round_eps = eps / 10.0 if round_eps is None else round_eps
    rhs_norm = tt_norm(rhs)
    if rhs_norm == 0.0:
        return KrylovResult(tt_zeros(rhs.mode_sizes), 0, True, 0.0)

    x: Optional[TTTensor] = None
    residual, beta = rhs, rhs_norm
    iterations = 0
    while beta > eps * rhs_norm and iterations < max_iter:
        basis = [tt_scale(residual, 1.0 / beta)]
        hessenberg = np.zeros((restart + 1, restart))
        coeffs = np.zeros(0)
        for j in range(min(restart, max_iter - iterations)):
            w = a.matvec(basis[j], round_eps)
            for i in range(j + 1):
                hessenberg[i, j] = tt_dot(w, basis[i])
                w = tt_round(tt_add(w, tt_scale(basis[i], -hessenberg[i, j])), round_eps)
            hessenberg[j + 1, j] = tt_norm(w)
            iterations += 1

            target = np.zeros(j + 2)
            target[0] = beta
            coeffs, *_ = np.linalg.lstsq(hessenberg[:j + 2, :j + 1], target, rcond=None)
            estimate = float(np.linalg.norm(hessenberg[:j + 2, :j + 1] @ coeffs - target))
            logger.debug(f"TT-GMRES step {iterations}: residual estimate {estimate / rhs_norm:.3e}")
            if estimate <= eps * rhs_norm or hessenberg[j + 1, j] <= BREAKDOWN_TOL * beta:
                break
            basis.append(tt_scale(w, 1.0 / hessenberg[j + 1, j]))

        update = tt_sum([tt_scale(v, c) for v, c in zip(basis, coeffs)], round_eps)
        x = update if x is None else tt_round(tt_add(x, update), round_eps)
        residual = tt_round(tt_add(rhs, tt_scale(a.matvec(x, round_eps), -1.0)), round_eps)
        beta = tt_norm(residual)

    converged = beta <= eps * rhs_norm
    if not converged:
        logger.warning(
            f"TT-GMRES stopped after {iterations} iterations with relative residual "
            f"{beta / rhs_norm:.3e} > {eps:.3e}"
        )
    return KrylovResult(x, iterations, converged, beta / rhs_norm)


# ==================== Step-truncation Newton ====================

class TTNonlinearSystem(Protocol):
    """Nonlinear system driven by step_truncation_newton."""

    def residual(self, u: TTTensor, eps: float) -> TTTensor: ...

    def correction(self, u: TTTensor, g: TTTensor, eps: float, tol: float) -> Tuple[TTTensor, int]: ...


class SpaceTimeTTSystem:
    """Reduced space-time collocation system in TT format."""

    def __init__(
        self,
        problem: ProblemSpec,
        grids: Sequence[ChebyshevGrid1D],
        ops: Optional[TTOperatorSet] = None,
        eps_cross: float = DEFAULT_EPS_CROSS,
        seed: Optional[int] = 0,
        restart: int = DEFAULT_TT_RESTART,
        linear_max_iter: int = DEFAULT_TT_MAX_ITER,
    ):
        problem.check_compatibility(grids)
        self.problem = problem
        self.grids = tuple(grids)
        self.split = split_indices(grids[0].n_points, len(grids))
        self.eps_cross = eps_cross
        self.seed = seed
        self.restart = restart
        self.linear_max_iter = linear_max_iter
        self.ops = ops or build_tt_operators(problem, grids, self.split, eps_cross, seed)

    def residual(self, u: TTTensor, eps: float) -> TTTensor:
        return tt_residual(u, self.ops, self.problem, eps)

    def correction(self, u: TTTensor, g: TTTensor, eps: float, tol: float) -> Tuple[TTTensor, int]:
        jacobian = jacobian_operator(u, self.ops, self.problem, eps)
        result = tt_linear_solve(
            jacobian, tt_scale(g, -1.0), tol, self.linear_max_iter, self.restart, round_eps=eps / 10.0
        )
        return result.solution, result.iterations

    def initial_guess(self, eps: float) -> TTTensor:
        """Initial condition broadcast along time on the interior, cross-interpolated."""
        evaluate = _node_evaluator(
            lambda t, *space: self.problem.initial(*space), self.grids, _interior_offsets(len(self.grids))
        )
        result = cross_interpolate(evaluate, self.split.interior_shape, min(eps, self.eps_cross), seed=self.seed)
        return tt_round(result.tensor, eps)

    def assemble(self, u: TTTensor) -> np.ndarray:
        """Dense full-grid solution with boundary values injected."""
        return self.split.embed(tt_to_dense(u), boundary_values(self.problem, self.grids))


@dataclass
class StepTruncationState:
    """Running state of a step-truncation Newton solve."""

    eps_k: float
    iterate: TTTensor
    residual_norm_0: float
    report: NewtonReport = field(default_factory=NewtonReport)

    @property
    def history(self) -> List[IterationRecord]:
        return self.report.history

    @property
    def eps_history(self) -> List[float]:
        return self.report.eps_history


def step_truncation_newton(
    system: TTNonlinearSystem,
    u0: TTTensor,
    eps0: float = DEFAULT_EPS0,
    tol_res: float = DEFAULT_TOL_RES,
    tol_update: float = DEFAULT_TOL_UPDATE,
    max_iter: int = DEFAULT_MAX_NEWTON,
    eps_floor: float = DEFAULT_EPS_FLOOR,
    adaptive: bool = True,
    solver: str = "tt-step-trunc",
) -> Tuple[TTTensor, StepTruncationState]:
    """
    Newton's method on TT tensors with truncation after every step.

    With ``adaptive`` the tolerance of step k is
    ``max(eps_floor, min(eps_{k-1}, |G_k| / |G_0|, |delta_k| / |U_k|))``. The
    residual ratio is applied before the Newton solve, and G_k is re-evaluated
    when it tightens eps; the update ratio is applied once delta_k is known.
    Candidates U + s * delta rounded at eps_k are tried for s = 1, 1/2, ... and
    the first one whose residual norm does not increase is accepted. After
    MAX_HALVINGS halvings the smallest-step candidate is accepted, the step is
    flagged ``line_search_exhausted`` and eps is halved for the next step.

    Rounding at eps keeps the residual and update ratios near eps, so the
    stopping targets are floored at the truncation floor: the residual test
    uses ``max(tol_res, floor)`` and the update test
    ``max(tol_update, UPDATE_FLOOR_FACTOR * floor)``, where the floor is
    ``eps_floor`` or, without ``adaptive``, the fixed tolerance.

    Args:
        system: Residual/correction provider
        u0: Initial iterate
        eps0: Initial truncation tolerance
        tol_res: Stop when |G_k| / |G_0| < tol_res
        tol_update: Stop when |delta_k| / |U_k| < tol_update
        max_iter: Maximum Newton steps
        eps_floor: Lower bound of the truncation tolerance
        adaptive: Tighten eps_k each step; otherwise keep eps0 fixed
        solver: Label stored in the report

    Returns:
        Final iterate and StepTruncationState

    Raises:
        ValueError: eps0 is not positive
        NonFiniteError: Even the smallest line-search step gives a non-finite residual
    """
    if eps0 <= 0:
        raise ValueError(f"Initial truncation tolerance must be positive, got {eps0}")
    start = time.perf_counter()
    eps = max(eps0, eps_floor)
    floor = eps_floor if adaptive else eps
    res_target = max(tol_res, floor)
    update_target = max(tol_update, UPDATE_FLOOR_FACTOR * floor)
    u = tt_round(u0, eps)
    g = system.residual(u, eps)
    g_norm = tt_norm(g)
    report = NewtonReport(solver=solver, initial_residual=g_norm, initial_eps=eps, initial_ranks=u.ranks)
    state = StepTruncationState(eps, u, g_norm, report)
    if g_norm == 0.0:
        report.finish(True, CRITERION_ZERO_RESIDUAL, time.perf_counter() - start)
        return u, state

    r0, g_eps = g_norm, eps
    converged, criterion = False, CRITERION_MAX_ITER
    for k in range(max_iter):
        iteration_start = time.perf_counter()
        if adaptive:
            eps = max(floor, min(eps, g_norm / r0))
        if eps < g_eps:
            g = system.residual(u, eps)
            g_norm, g_eps = tt_norm(g), eps

        tol = max(forcing_term(g_norm / r0, tol_res), eps)
        delta, linear_iterations = system.correction(u, g, eps, tol)
        u_norm = tt_norm(u)
        update = tt_norm(delta) / u_norm if u_norm > 0 else np.inf
        if adaptive:
            eps = max(floor, min(eps, update))
        state.eps_k = eps

        step, candidate, g_candidate, candidate_norm = 1.0, u, g, np.inf
        for halving in range(MAX_HALVINGS + 1):
            candidate = tt_round(tt_add(u, tt_scale(delta, step)), eps)
            try:
                g_candidate = system.residual(candidate, eps)
                candidate_norm = tt_norm(g_candidate)
            except NonFiniteError:
                g_candidate, candidate_norm = None, np.inf
            if candidate_norm <= g_norm or halving == MAX_HALVINGS:
                break
            step *= 0.5
        exhausted = candidate_norm > g_norm
        if exhausted:
            if g_candidate is None:
                raise NonFiniteError(f"line search at TT-Newton step {k + 1}")
            logger.warning(
                f"Line search exhausted after {MAX_HALVINGS} halvings at TT-Newton step {k + 1}; "
                f"accepting s = {step:g}"
            )

        report.record(IterationRecord(
            residual_norm=candidate_norm,
            previous_residual_norm=g_norm,
            update_norm=update,
            step_factor=step,
            elapsed=time.perf_counter() - iteration_start,
            linear_iterations=linear_iterations,
            eps=eps,
            ranks=candidate.ranks,
            compression_ratio=compression_ratio(candidate),
            line_search_exhausted=exhausted,
        ))
        u, g, g_norm, g_eps = candidate, g_candidate, candidate_norm, eps
        state.iterate = u
        logger.info(
            f"TT-Newton {k + 1}: |G|/|G0| = {g_norm / r0:.3e}, |dU|/|U| = {update:.3e}, "
            f"s = {step:g}, eps = {eps:.1e}, ranks = {u.ranks}"
        )

        if g_norm / r0 < res_target:
            converged, criterion = True, CRITERION_RESIDUAL
            break
        if update < update_target:
            converged, criterion = True, CRITERION_UPDATE
            break
        if exhausted and adaptive:
            eps = max(floor, 0.5 * eps)
            state.eps_k = eps

    if not converged:
        logger.warning(f"TT-Newton did not converge in {max_iter} iterations (|G|/|G0| = {g_norm / r0:.3e})")
    report.finish(converged, criterion, time.perf_counter() - start)
    return u, state


def tt_newton_solve(
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    u0: Optional[TTTensor] = None,
    eps0: float = DEFAULT_EPS0,
    tol_res: float = DEFAULT_TOL_RES,
    tol_update: float = DEFAULT_TOL_UPDATE,
    max_iter: int = DEFAULT_MAX_NEWTON,
    eps_floor: float = DEFAULT_EPS_FLOOR,
    adaptive: bool = True,
    eps_cross: float = DEFAULT_EPS_CROSS,
    seed: Optional[int] = 0,
    solver: str = "tt-step-trunc",
) -> Tuple[TTTensor, StepTruncationState, SpaceTimeTTSystem]:
    """Build the TT system for ``problem`` and run step_truncation_newton on it."""
    system = SpaceTimeTTSystem(problem, grids, eps_cross=eps_cross, seed=seed)
    if u0 is None:
        u0 = system.initial_guess(max(eps0, eps_floor))
    logger.info(f"TT Newton for '{problem.name}' on interior {system.split.interior_shape}")
    u, state = step_truncation_newton(
        system, u0, eps0, tol_res, tol_update, max_iter, eps_floor, adaptive, solver
    )
    return u, state, system
