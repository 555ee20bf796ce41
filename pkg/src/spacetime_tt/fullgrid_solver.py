"""
Full-Grid Solver - space-time collocation of the nonlinear convection-diffusion equation.

Solves u_t - a(u) Lap(u) + b(u) . grad(u) = f(u) + s(t, x) on a tensor grid of
Chebyshev-Gauss-Lobatto nodes. The t = 0 plane and the spatial boundary planes hold
known initial/boundary values; the remaining interior nodes are the unknowns of a
nonlinear system solved with Newton's method, a line search and matrix-free GMRES.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .chebyshev import ChebyshevGrid1D, build_grids
from .dense_core import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESTART,
    DenseField,
    FieldOperator,
    as_field,
    krylov_solve,
    mode_product,
)
from .errors import NonFiniteError, ProblemSpecError, ShapeMismatchError
from .report import (
    CRITERION_MAX_ITER,
    CRITERION_RESIDUAL,
    CRITERION_UPDATE,
    CRITERION_ZERO_RESIDUAL,
    IterationRecord,
    NewtonReport,
)

logger = logging.getLogger(__name__)

# Configuration constants
DEFAULT_TOL_RES = 1e-6
DEFAULT_TOL_UPDATE = 1e-6
DEFAULT_MAX_NEWTON = 20
MAX_HALVINGS = 20
MAX_FORCING = 1e-2
COMPATIBILITY_TOL = 1e-10

ScalarFn = Callable[[np.ndarray], np.ndarray]
NodalFn = Callable[..., np.ndarray]


def _evaluate(fn: Callable, *args: np.ndarray) -> np.ndarray:
    """Call a vectorized coefficient and broadcast constants to the argument shape."""
    values = np.asarray(fn(*args), dtype=float)
    return np.broadcast_to(values, np.broadcast_shapes(*[np.shape(a) for a in args]))


@dataclass(frozen=True)
class ProblemSpec:
    """
    Nonlinear convection-diffusion problem on [0, t_end] x box.

    Coefficients act elementwise on arrays of solution values. ``boundary`` is
    g(t, x, y, z), ``initial`` is h(x, y, z); ``source`` is an optional extra
    right-hand side s(t, x, y, z) (manufactured solutions).
    """

    name: str
    diffusion: ScalarFn
    diffusion_prime: ScalarFn
    convection: Tuple[ScalarFn, ...]
    convection_prime: Tuple[ScalarFn, ...]
    forcing: ScalarFn
    forcing_prime: ScalarFn
    boundary: NodalFn
    initial: NodalFn
    t_end: float = 1.0
    box: Tuple[Tuple[float, float], ...] = ((-1.0, 1.0),) * 3
    source: Optional[NodalFn] = None
    exact_solution: Optional[NodalFn] = None

    def __post_init__(self):
        if self.t_end <= 0:
            raise ProblemSpecError(f"Final time must be positive, got {self.t_end}")
        if len(self.convection) != len(self.box) or len(self.convection_prime) != len(self.box):
            raise ProblemSpecError(
                f"Problem '{self.name}' needs one convection component per spatial direction "
                f"({len(self.box)}), got {len(self.convection)}"
            )
        for a, b in self.box:
            if not a < b:
                raise ProblemSpecError(f"Degenerate spatial interval [{a}, {b}] in problem '{self.name}'")

    @property
    def ndim(self) -> int:
        """Number of space-time dimensions."""
        return len(self.box) + 1

    @property
    def intervals(self) -> Tuple[Tuple[float, float], ...]:
        return ((0.0, float(self.t_end)),) + tuple(self.box)

    def build_grids(self, n_points: int) -> Tuple[ChebyshevGrid1D, ...]:
        return build_grids(self.intervals, n_points)

    def compatibility_defect(self, grids: Sequence[ChebyshevGrid1D]) -> float:
        """Max |g(0, x) - h(x)| over spatial boundary nodes."""
        space = np.meshgrid(*[g.nodes for g in grids[1:]], indexing="ij")
        split = split_indices(grids[0].n_points, len(grids))
        on_boundary = ~split.interior_mask[1]
        t0 = np.zeros_like(space[0])
        g = _evaluate(self.boundary, t0, *space)
        h = _evaluate(self.initial, *space)
        if not on_boundary.any():
            return 0.0
        return float(np.max(np.abs(g - h)[on_boundary]))

    def check_compatibility(self, grids: Sequence[ChebyshevGrid1D], tol: float = COMPATIBILITY_TOL) -> None:
        """Raise ProblemSpecError if IC and BC disagree on the boundary at t = 0."""
        defect = self.compatibility_defect(grids)
        if defect > tol:
            raise ProblemSpecError(
                f"Initial and boundary data of '{self.name}' disagree by {defect:.3e} at t = 0"
            )


@dataclass(frozen=True)
class IndexSplit:
    """
    Partition of the space-time grid into boundary and interior nodes.

    Boundary nodes are the t = 0 plane plus every spatial-boundary plane for all t.
    The final-time plane is interior. Interior nodes, in C order over the
    interior block, are the unknowns of the reduced system.
    """

    n_points: int
    ndim: int = 4

    @property
    def full_shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.ndim

    @property
    def interior_shape(self) -> Tuple[int, ...]:
        return (self.n_points - 1,) + (self.n_points - 2,) * (self.ndim - 1)

    @property
    def interior(self) -> Tuple[slice, ...]:
        """Slices selecting the interior block of a full-grid field."""
        return (slice(1, None),) + (slice(1, -1),) * (self.ndim - 1)

    @property
    def interior_count(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def boundary_count(self) -> int:
        return self.n_points ** self.ndim - self.interior_count

    @property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.full_shape, dtype=bool)
        mask[self.interior] = True
        return mask

    @property
    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask

    def interior_indices(self) -> np.ndarray:
        """Multi-indices of interior nodes, one row each, in C order."""
        return np.argwhere(self.interior_mask)

    def boundary_indices(self) -> np.ndarray:
        return np.argwhere(self.boundary_mask)

    def restrict(self, field: DenseField) -> DenseField:
        field = np.asarray(field)
        if field.shape != self.full_shape:
            raise ShapeMismatchError(self.full_shape, field.shape, "full-grid field")
        return field[self.interior].copy()

    def embed(self, u_int: DenseField, boundary: DenseField) -> DenseField:
        """Full-grid field with ``u_int`` on the interior and ``boundary`` elsewhere."""
        u_int = np.asarray(u_int, dtype=float)
        if u_int.shape != self.interior_shape:
            raise ShapeMismatchError(self.interior_shape, u_int.shape, "interior field")
        full = np.array(boundary, dtype=float, copy=True)
        full[self.interior] = u_int
        return full


def split_indices(n_points: int, ndim: int = 4) -> IndexSplit:
    """Boundary/interior split for ``n_points`` collocation points per dimension.

    Raises:
        ValueError: ``n_points < 3`` leaves no interior node
    """
    if n_points < 3:
        raise ValueError(f"At least 3 collocation points are needed for an interior, got {n_points}")
    if ndim < 2:
        raise ValueError(f"A space-time grid needs at least 2 dimensions, got {ndim}")
    return IndexSplit(n_points, ndim)


def node_mesh(grids: Sequence[ChebyshevGrid1D]) -> Tuple[np.ndarray, ...]:
    """Coordinate arrays (t, x, y, z) of every grid node."""
    return tuple(np.meshgrid(*[g.nodes for g in grids], indexing="ij"))


def _uniform_points(grids: Sequence[ChebyshevGrid1D]) -> int:
    sizes = {g.n_points for g in grids}
    if len(sizes) != 1:
        raise ShapeMismatchError((grids[0].n_points,) * len(grids), [g.n_points for g in grids], "grid sizes")
    return sizes.pop()


def boundary_values(problem: ProblemSpec, grids: Sequence[ChebyshevGrid1D]) -> DenseField:
    """Full-grid field holding g on boundary nodes, h on the t = 0 plane and 0 inside."""
    if len(grids) != problem.ndim:
        raise ShapeMismatchError((problem.ndim,), (len(grids),), "number of grids")
    split = split_indices(_uniform_points(grids), len(grids))
    mesh = node_mesh(grids)
    values = np.zeros(split.full_shape)
    mask = split.boundary_mask
    values[mask] = _evaluate(problem.boundary, *mesh)[mask]
    values[0] = _evaluate(problem.initial, *[m[0] for m in mesh[1:]])
    return values


class FullGridSystem:
    """
    Reduced nonlinear system on the interior nodes.

    The residual is evaluated on the full grid with boundary nodes frozen at
    their known values and then restricted to the interior, which is the
    reduced operator plus the boundary term without assembling either.
    """

    def __init__(
        self,
        problem: ProblemSpec,
        grids: Sequence[ChebyshevGrid1D],
        split: Optional[IndexSplit] = None,
    ):
        if len(grids) != problem.ndim:
            raise ShapeMismatchError((problem.ndim,), (len(grids),), "number of grids")
        self.problem = problem
        self.grids = tuple(grids)
        self.split = split or split_indices(_uniform_points(grids), len(grids))
        self.boundary = boundary_values(problem, grids)
        mesh = node_mesh(grids)
        self.source = None
        if problem.source is not None:
            self.source = np.array(_evaluate(problem.source, *mesh))

    @property
    def interior_shape(self) -> Tuple[int, ...]:
        return self.split.interior_shape

    def assemble(self, u_int: DenseField) -> DenseField:
        """Full-grid solution with boundary values injected."""
        return self.split.embed(u_int, self.boundary)

    def initial_guess(self) -> DenseField:
        """Interior values of the initial condition broadcast along time."""
        ic = self.boundary[0][self.split.interior[1:]]
        return np.broadcast_to(ic, self.interior_shape).copy()

    def _time_derivative(self, u: DenseField) -> DenseField:
        return mode_product(u, self.grids[0].d1, 0)

    def _laplacian(self, u: DenseField) -> DenseField:
        return sum(mode_product(u, g.d2, axis) for axis, g in enumerate(self.grids) if axis > 0)

    def _gradients(self, u: DenseField) -> Tuple[DenseField, ...]:
        return tuple(mode_product(u, g.d1, axis) for axis, g in enumerate(self.grids) if axis > 0)

    def residual(self, u_int: DenseField) -> DenseField:
        """Interior residual G(U) of the collocation equations.

        Raises:
            NonFiniteError: Coefficients produced NaN or Inf
        """
        p = self.problem
        u = self.assemble(as_field(u_int, self.interior_shape, "interior iterate"))
        g = self._time_derivative(u) - _evaluate(p.diffusion, u) * self._laplacian(u)
        for b, grad in zip(p.convection, self._gradients(u)):
            g = g + _evaluate(b, u) * grad
        g = g - _evaluate(p.forcing, u)
        if self.source is not None:
            g = g - self.source
        out = g[self.split.interior]
        if not np.all(np.isfinite(out)):
            raise NonFiniteError("residual")
        return out

    def linearize(self, u_int: DenseField) -> FieldOperator:
        """Jacobian action at ``u_int`` as a closure over precomputed coefficient fields."""
        p = self.problem
        u = self.assemble(as_field(u_int, self.interior_shape, "interior iterate"))
        lap_u = self._laplacian(u)
        grads_u = self._gradients(u)

        diffusion = _evaluate(p.diffusion, u)
        convection = [_evaluate(b, u) for b in p.convection]
        diagonal = -_evaluate(p.diffusion_prime, u) * lap_u - _evaluate(p.forcing_prime, u)
        for db, grad in zip(p.convection_prime, grads_u):
            diagonal = diagonal + _evaluate(db, u) * grad

        split = self.split
        full_shape = split.full_shape

        def apply(v_int: DenseField) -> DenseField:
            v = np.zeros(full_shape)
            v[split.interior] = v_int
            jv = self._time_derivative(v) - diffusion * self._laplacian(v) + diagonal * v
            for b, grad in zip(convection, self._gradients(v)):
                jv = jv + b * grad
            return jv[split.interior]

        return apply


def residual(
    u_int: DenseField,
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    split: Optional[IndexSplit] = None,
) -> DenseField:
    """Reduced residual at ``u_int``; see FullGridSystem.residual."""
    return FullGridSystem(problem, grids, split).residual(u_int)


def jacobian_apply(
    u_int: DenseField,
    v: DenseField,
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    split: Optional[IndexSplit] = None,
) -> DenseField:
    """Analytic Jacobian of the reduced residual at ``u_int`` applied to ``v``."""
    return FullGridSystem(problem, grids, split).linearize(u_int)(np.asarray(v, dtype=float))


def forcing_term(ratio: float, tol_res: float) -> float:
    """Relative tolerance for the inner linear solve at residual ratio ``ratio``."""
    return min(MAX_FORCING, 0.5 * ratio, 0.5 * tol_res / ratio)


def _safe_norm(residual_fn: Callable[[DenseField], DenseField], u: DenseField):
    try:
        g = residual_fn(u)
    except NonFiniteError:
        return None, np.inf
    return g, float(np.linalg.norm(g))


def newton_iterate(
    residual_fn: Callable[[DenseField], DenseField],
    correction_fn: Callable[[DenseField, DenseField, float], Tuple[DenseField, int]],
    u0: DenseField,
    tol_res: float = DEFAULT_TOL_RES,
    tol_update: float = DEFAULT_TOL_UPDATE,
    max_iter: int = DEFAULT_MAX_NEWTON,
    solver: str = "fullgrid",
) -> Tuple[DenseField, NewtonReport]:
    """
    Damped Newton iteration on dense arrays.

    The line search halves the step until the residual norm does not grow.
    After MAX_HALVINGS halvings the smallest-step candidate is accepted, the
    step is flagged ``line_search_exhausted`` and iteration continues.

    Args:
        residual_fn: Maps an iterate to its residual
        correction_fn: ``(u, g, tol) -> (delta, linear_iterations)`` solving J delta = -g
            to relative tolerance ``tol``
        u0: Initial iterate
        tol_res: Stop when ||G_k|| / ||G_0|| < tol_res
        tol_update: Stop when ||delta_k|| / ||U_k|| < tol_update
        max_iter: Maximum Newton steps

    Returns:
        Final iterate and its NewtonReport

    Raises:
        NonFiniteError: Even the smallest line-search step gives a non-finite residual
    """
    if tol_res <= 0 or tol_update <= 0:
        raise ValueError("Newton tolerances must be positive")
    start = time.perf_counter()
    u = np.array(u0, dtype=float, copy=True)
    g = residual_fn(u)
    g_norm = float(np.linalg.norm(g))
    report = NewtonReport(solver=solver, initial_residual=g_norm)
    if g_norm == 0.0:
        report.finish(True, CRITERION_ZERO_RESIDUAL, time.perf_counter() - start)
        return u, report

    r0 = g_norm
    converged, criterion = False, CRITERION_MAX_ITER
    for k in range(max_iter):
        iteration_start = time.perf_counter()
        delta, linear_iterations = correction_fn(u, g, forcing_term(g_norm / r0, tol_res))

        step, candidate, g_candidate, candidate_norm = 1.0, None, None, np.inf
        exhausted = False
        for halving in range(MAX_HALVINGS + 1):
            candidate = u + step * delta
            g_candidate, candidate_norm = _safe_norm(residual_fn, candidate)
            if candidate_norm <= g_norm or halving == MAX_HALVINGS:
                break
            step *= 0.5
        if candidate_norm > g_norm:
            if g_candidate is None:
                raise NonFiniteError(f"line search at Newton step {k + 1}")
            exhausted = True
            logger.warning(
                f"Line search exhausted after {MAX_HALVINGS} halvings at Newton step {k + 1}; "
                f"accepting s = {step:g}"
            )

        u_norm = float(np.linalg.norm(u))
        update = float(np.linalg.norm(delta)) / u_norm if u_norm > 0 else np.inf
        report.record(IterationRecord(
            residual_norm=candidate_norm,
            previous_residual_norm=g_norm,
            update_norm=update,
            step_factor=step,
            elapsed=time.perf_counter() - iteration_start,
            linear_iterations=linear_iterations,
            line_search_exhausted=exhausted,
        ))
        u, g, g_norm = candidate, g_candidate, candidate_norm
        logger.info(
            f"Newton {k + 1}: |G|/|G0| = {g_norm / r0:.3e}, |dU|/|U| = {update:.3e}, s = {step:g}"
        )

        if g_norm / r0 < tol_res:
            converged, criterion = True, CRITERION_RESIDUAL
            break
        if update < tol_update:
            converged, criterion = True, CRITERION_UPDATE
            break

    if not converged and criterion == CRITERION_MAX_ITER:
        logger.warning(f"Newton did not converge in {max_iter} iterations (|G|/|G0| = {g_norm / r0:.3e})")
    report.finish(converged, criterion, time.perf_counter() - start)
    return u, report


def newton_solve(
    problem: ProblemSpec,
    grids: Sequence[ChebyshevGrid1D],
    initial_guess: Optional[DenseField] = None,
    tol_res: float = DEFAULT_TOL_RES,
    tol_update: float = DEFAULT_TOL_UPDATE,
    max_iter: int = DEFAULT_MAX_NEWTON,
    restart: int = DEFAULT_RESTART,
    krylov_max_iter: int = DEFAULT_MAX_ITER,
) -> Tuple[DenseField, NewtonReport]:
    """
    Solve the space-time collocation system with Newton-GMRES.

    Args:
        problem: Problem definition
        grids: One Chebyshev grid per space-time direction
        initial_guess: Interior field; defaults to the IC broadcast in time
        tol_res: Relative residual stopping tolerance
        tol_update: Relative update stopping tolerance
        max_iter: Maximum Newton steps
        restart: GMRES restart length
        krylov_max_iter: Cap on GMRES iterations per Newton step

    Returns:
        Full-grid solution (boundary values injected) and NewtonReport

    Raises:
        ProblemSpecError: Initial and boundary data are incompatible
    """
    problem.check_compatibility(grids)
    system = FullGridSystem(problem, grids)
    u0 = system.initial_guess() if initial_guess is None else as_field(
        initial_guess, system.interior_shape, "initial guess"
    )

    def correction(u: DenseField, g: DenseField, tol: float) -> Tuple[DenseField, int]:
        result = krylov_solve(system.linearize(u), -g, tol, max_iter=krylov_max_iter, restart=restart)
        return result.solution, result.iterations

    logger.info(f"Full-grid Newton for '{problem.name}' with {system.split.interior_count} unknowns")
    u_int, report = newton_iterate(system.residual, correction, u0, tol_res, tol_update, max_iter)
    return system.assemble(u_int), report


def relative_error(u: DenseField, exact: NodalFn, grids: Sequence[ChebyshevGrid1D]) -> float:
    """Relative grid-node 2-norm error ``||u - exact|| / ||exact||``.

    Raises:
        ValueError: The exact solution vanishes on every node
    """
    reference = np.array(_evaluate(exact, *node_mesh(grids)))
    u = np.asarray(u, dtype=float)
    if u.shape != reference.shape:
        raise ShapeMismatchError(reference.shape, u.shape, "solution field")
    norm = float(np.linalg.norm(reference))
    if norm == 0.0:
        raise ValueError("Exact solution has zero norm on the grid; relative error undefined")
    return float(np.linalg.norm(u - reference)) / norm
