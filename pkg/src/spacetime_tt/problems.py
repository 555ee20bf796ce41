"""
Problems - benchmark problem definitions and the experiment registry.

Provides the manufactured-solution convection-diffusion problem, the 3D viscous
Burgers problem with its exact solution, and the synthetic elementwise
root-finding task used to study rank growth of TT Newton iterates.
"""

import difflib
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ProblemNotFound
from .fullgrid_solver import ProblemSpec
from .tt_core import (
    DEFAULT_DENSE_CAP,
    TTTensor,
    cross_interpolate,
    tt_evaluate,
    tt_from_dense,
    tt_norm,
    tt_ones,
    tt_random,
    tt_round,
    tt_to_dense,
)

logger = logging.getLogger(__name__)

# Configuration constants
MANUFACTURED_DECAY = 0.1
MANUFACTURED_BOX = ((-2.0, 2.0),) * 3
BURGERS_BOX = ((0.0, 6.0),) * 3
ROOTFIND_MODE_SIZES = (16, 16, 16, 16)
ROOTFIND_RANKS = (2, 2, 2)
ROOTFIND_EXACT_EPS = 1e-14
ROOTFIND_NOISE_FLOOR = 1e-13
MAX_SUGGESTIONS = 3


def _constant(value: float) -> Polynomial:
    return Polynomial([value])


IDENTITY = Polynomial([0.0, 1.0])


# ==================== Manufactured solution ====================

def manufactured_exact(t, x, y, z):
    """exp(-0.1 t) sin(pi x) sin(pi y) sin(pi z)."""
    return np.exp(-MANUFACTURED_DECAY * t) * np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z)


def _manufactured_source(t, x, y, z):
    # PDE defect of the exact solution with a = 1 + u^2, b = (u, 1, 1), f = u - u^3
    decay = np.exp(-MANUFACTURED_DECAY * t)
    sx, sy, sz = np.sin(np.pi * x), np.sin(np.pi * y), np.sin(np.pi * z)
    cx, cy, cz = np.cos(np.pi * x), np.cos(np.pi * y), np.cos(np.pi * z)
    u = decay * sx * sy * sz
    u_t = -MANUFACTURED_DECAY * u
    laplacian = -3.0 * np.pi ** 2 * u
    u_x = np.pi * decay * cx * sy * sz
    u_y = np.pi * decay * sx * cy * sz
    u_z = np.pi * decay * sx * sy * cz
    return u_t - (1.0 + u ** 2) * laplacian + u * u_x + u_y + u_z - (u - u ** 3)


def manufactured_ncd() -> ProblemSpec:
    """Nonlinear convection-diffusion problem with a manufactured exact solution.

    a(u) = 1 + u^2, b(u) = (u, 1, 1), f(u) = u - u^3 on [0, 1] x [-2, 2]^3, plus
    the source term that makes ``manufactured_exact`` an exact solution.
    """
    return ProblemSpec(
        name="manufactured",
        diffusion=Polynomial([1.0, 0.0, 1.0]),
        diffusion_prime=Polynomial([0.0, 2.0]),
        convection=(IDENTITY, _constant(1.0), _constant(1.0)),
        convection_prime=(_constant(1.0), _constant(0.0), _constant(0.0)),
        forcing=Polynomial([0.0, 1.0, 0.0, -1.0]),
        forcing_prime=Polynomial([1.0, 0.0, -3.0]),
        boundary=manufactured_exact,
        initial=lambda x, y, z: manufactured_exact(0.0, x, y, z),
        t_end=1.0,
        box=MANUFACTURED_BOX,
        source=_manufactured_source,
        exact_solution=manufactured_exact,
    )


# ==================== Burgers ====================

def burgers_exact(t, x, y, z):
    """Exact solution of u_t + u (u_x + u_y + u_z) = Lap(u) depending on x + y + z."""
    decay = np.exp(-np.pi ** 2 * t / 3.0)
    phase = np.pi * (x + y + z) / 3.0
    return (2.0 / 3.0) * np.pi * decay * np.sin(phase) / (5.0 + decay * np.cos(phase))


def burgers3d() -> ProblemSpec:
    """3D viscous Burgers equation on [0, 1] x [0, 6]^3 with exact IC/BC."""
    return ProblemSpec(
        name="burgers",
        diffusion=_constant(1.0),
        diffusion_prime=_constant(0.0),
        convection=(IDENTITY, IDENTITY, IDENTITY),
        convection_prime=(_constant(1.0),) * 3,
        forcing=_constant(0.0),
        forcing_prime=_constant(0.0),
        boundary=burgers_exact,
        initial=lambda x, y, z: burgers_exact(0.0, x, y, z),
        t_end=1.0,
        box=BURGERS_BOX,
        exact_solution=burgers_exact,
    )


# ==================== Synthetic root-finding ====================

def q_values(y: np.ndarray, target: np.ndarray) -> np.ndarray:
    """exp(-y) - y^3 - target, elementwise."""
    return np.exp(-y) - y ** 3 - target


def q_derivative(y: np.ndarray) -> np.ndarray:
    """Diagonal of the Jacobian of q, elementwise; strictly negative."""
    return -np.exp(-y) - 3.0 * y ** 2


@dataclass
class RootFindTask:
    """
    Elementwise root-finding problem q(Y) = exp(-Y) - Y^3 - G = 0 on TT tensors.

    ``exact`` is the known root and ``target`` is G. The task implements the
    residual/correction interface of the TT Newton driver. The Jacobian is the
    diagonal q'(Y), so the Newton correction is -q(Y) / q'(Y) entry by entry.
    Boxes under the dense cap are evaluated in full and compressed with TT-SVD
    at the requested tolerance; larger boxes go through cross interpolation.
    """

    exact: TTTensor
    target: TTTensor
    seed: Optional[int] = 0
    dense_cap: int = DEFAULT_DENSE_CAP

    @property
    def mode_sizes(self) -> Tuple[int, ...]:
        return self.exact.mode_sizes

    @property
    def size(self) -> int:
        return int(np.prod(self.mode_sizes))

    def _compress(self, values: Callable[[np.ndarray, np.ndarray], np.ndarray], y: TTTensor, eps: float) -> TTTensor:
        """TT approximation at ``eps`` of ``values(Y, G)`` applied entrywise."""
        if self.size <= self.dense_cap:
            return tt_from_dense(values(tt_to_dense(y), tt_to_dense(self.target)), eps)
        scale = tt_norm(self.target) / np.sqrt(float(self.size))
        result = cross_interpolate(
            lambda indices: values(tt_evaluate(y, indices), tt_evaluate(self.target, indices)),
            self.mode_sizes,
            eps,
            norm_floor=ROOTFIND_NOISE_FLOOR * scale,
            seed=self.seed,
        )
        return tt_round(result.tensor, eps)

    def residual(self, y: TTTensor, eps: float) -> TTTensor:
        return self._compress(q_values, y, eps)

    def correction(self, y: TTTensor, g: TTTensor, eps: float, tol: float) -> Tuple[TTTensor, int]:
        return self._compress(lambda v, target: -q_values(v, target) / q_derivative(v), y, eps), 0

    def initial_guess(self) -> TTTensor:
        return tt_ones(self.mode_sizes)

    def dense_system(self) -> Tuple[Callable, Callable, np.ndarray]:
        """Residual, correction and initial iterate for the dense Newton driver."""
        target = tt_to_dense(self.target)

        def residual(y: np.ndarray) -> np.ndarray:
            return q_values(y, target)

        def correction(y: np.ndarray, g: np.ndarray, tol: float) -> Tuple[np.ndarray, int]:
            return -g / q_derivative(y), 0

        return residual, correction, np.ones(self.mode_sizes)


def experiment1_rootfind(
    seed: Optional[int] = 0,
    mode_sizes: Sequence[int] = ROOTFIND_MODE_SIZES,
    ranks: Sequence[int] = ROOTFIND_RANKS,
) -> RootFindTask:
    """
    Seeded synthetic root-finding task with a known low-rank root.

    The root has cores drawn uniformly from [0, 1] and is rounded, so every
    entry is non-negative. G = exp(-Y) - Y^3 is formed densely and compressed
    with TT-SVD when it fits under the dense cap, otherwise by cross.
    """
    sizes = tuple(int(n) for n in mode_sizes)
    rng = np.random.default_rng(seed)
    exact = tt_round(tt_random(sizes, ranks, rng), ROOTFIND_EXACT_EPS)

    if np.prod(sizes) <= DEFAULT_DENSE_CAP:
        dense = tt_to_dense(exact)
        target = tt_from_dense(np.exp(-dense) - dense ** 3, ROOTFIND_EXACT_EPS)
    else:
        result = cross_interpolate(
            lambda indices: q_values(tt_evaluate(exact, indices), 0.0), sizes, ROOTFIND_EXACT_EPS, seed=seed
        )
        target = tt_round(result.tensor, ROOTFIND_EXACT_EPS)
    logger.debug(f"Root-finding task: exact ranks {exact.ranks}, target ranks {target.ranks}")
    return RootFindTask(exact=exact, target=target, seed=seed)


# ==================== Registry ====================

PROBLEMS: Dict[str, Callable[[], ProblemSpec]] = {
    "manufactured": manufactured_ncd,
    "burgers": burgers3d,
}
EXPERIMENTS: Tuple[str, ...] = ("exp1",) + tuple(PROBLEMS)


def get_problem(name: str) -> ProblemSpec:
    """Look up a PDE problem by experiment name.

    Raises:
        ProblemNotFound: Unknown name, with close matches as suggestions
    """
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ProblemNotFound(name, _get_suggestions(name)) from None


def _get_suggestions(name: str) -> List[str]:
    return difflib.get_close_matches(name, EXPERIMENTS, n=MAX_SUGGESTIONS, cutoff=0.4)
