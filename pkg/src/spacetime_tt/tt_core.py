"""
Tensor Train Core - TT tensors, TT matrices, rounding and cross interpolation.

A TT tensor stores a d-way array as cores G_k of shape (r_{k-1}, n_k, r_k) with
r_0 = r_d = 1; element (i_1, ..., i_d) is the matrix product G_1[i_1] ... G_d[i_d].
TT matrices use four-way cores (r_{k-1}, n_out, n_in, r_k). Tensors are immutable:
every operation returns a new object.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import NonFiniteError, RankDeficiencyError, ShapeMismatchError, SizeCapExceeded

logger = logging.getLogger(__name__)

# Configuration constants
DEFAULT_DENSE_CAP = 2 ** 24
DEFAULT_MAXVOL_TOL = 0.05
DEFAULT_MAXVOL_SWEEPS = 100
DEFAULT_CROSS_RANK_CAP = 64
DEFAULT_CROSS_RANK_STEP = 2
DEFAULT_CROSS_SWEEPS = 2
DEFAULT_VALIDATION_SIZE = 1000
EXHAUSTIVE_VALIDATION_LIMIT = 4096
RANK_TOL = 1e-13

IndexEvaluator = Callable[[np.ndarray], np.ndarray]


# ==================== Tensors ====================

@dataclass(frozen=True)
class TTTensor:
    """Tensor in TT format; see the module docstring for the core layout."""

    cores: Tuple[np.ndarray, ...]

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=float) for c in self.cores)
        if not cores:
            raise ValueError("A TT tensor needs at least one core")
        for k, core in enumerate(cores):
            if core.ndim != 3:
                raise ShapeMismatchError((3,), (core.ndim,), f"core {k} dimensionality")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ShapeMismatchError((1, 1), (cores[0].shape[0], cores[-1].shape[2]), "boundary ranks")
        for k in range(len(cores) - 1):
            if cores[k].shape[2] != cores[k + 1].shape[0]:
                raise ShapeMismatchError(
                    (cores[k].shape[2],), (cores[k + 1].shape[0],), f"rank between cores {k} and {k + 1}"
                )
        object.__setattr__(self, "cores", cores)

    @property
    def ndim(self) -> int:
        return len(self.cores)

    @property
    def mode_sizes(self) -> Tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> Tuple[int, ...]:
        """Interior ranks (r_1, ..., r_{d-1})."""
        return tuple(c.shape[2] for c in self.cores[:-1])

    @property
    def size(self) -> int:
        """Number of stored core entries."""
        return int(sum(c.size for c in self.cores))

    def __add__(self, other: "TTTensor") -> "TTTensor":
        return tt_add(self, other)

    def __sub__(self, other: "TTTensor") -> "TTTensor":
        return tt_add(self, tt_scale(other, -1.0))

    def __neg__(self) -> "TTTensor":
        return tt_scale(self, -1.0)

    def __mul__(self, alpha: float) -> "TTTensor":
        return tt_scale(self, alpha)

    __rmul__ = __mul__


def _check_modes(x: TTTensor, y: TTTensor, what: str) -> None:
    if x.mode_sizes != y.mode_sizes:
        raise ShapeMismatchError(x.mode_sizes, y.mode_sizes, what)


def tt_rank1(vectors: Sequence[np.ndarray]) -> TTTensor:
    """Rank-1 tensor v_1 o v_2 o ... o v_d."""
    return TTTensor(tuple(np.asarray(v, dtype=float).reshape(1, -1, 1) for v in vectors))


def tt_ones(mode_sizes: Sequence[int]) -> TTTensor:
    return tt_rank1([np.ones(n) for n in mode_sizes])


def tt_zeros(mode_sizes: Sequence[int]) -> TTTensor:
    return tt_rank1([np.zeros(n) for n in mode_sizes])


def tt_random(
    mode_sizes: Sequence[int],
    ranks: Sequence[int],
    rng: Optional[np.random.Generator] = None,
    low: float = 0.0,
    high: float = 1.0,
) -> TTTensor:
    """TT tensor with cores drawn uniformly from [low, high)."""
    if len(ranks) != len(mode_sizes) - 1:
        raise ShapeMismatchError((len(mode_sizes) - 1,), (len(ranks),), "rank list")
    rng = rng if rng is not None else np.random.default_rng()
    full_ranks = (1,) + tuple(ranks) + (1,)
    return TTTensor(tuple(
        rng.uniform(low, high, size=(full_ranks[k], n, full_ranks[k + 1]))
        for k, n in enumerate(mode_sizes)
    ))


def _truncation_rank(s: np.ndarray, delta: float, max_rank: Optional[int] = None) -> int:
    """Smallest rank whose discarded singular values have 2-norm at most ``delta``."""
    tail = np.append(np.sqrt(np.cumsum(s[::-1] ** 2))[::-1], 0.0)
    rank = max(int(np.argmax(tail <= delta)), 1)
    if max_rank is not None:
        rank = min(rank, max_rank)
    return rank


def tt_from_dense(
    field: np.ndarray,
    eps: float = 0.0,
    max_rank: Optional[int] = None,
) -> TTTensor:
    """TT-SVD of a dense array with relative Frobenius accuracy ``eps``.

    Each unfolding is truncated at ``eps * ||field|| / sqrt(d - 1)``.
    """
    if eps < 0:
        raise ValueError(f"Truncation tolerance must be non-negative, got {eps}")
    field = np.asarray(field, dtype=float)
    d = field.ndim
    if d == 1:
        return TTTensor((field.reshape(1, -1, 1),))
    delta = eps * float(np.linalg.norm(field)) / np.sqrt(d - 1)

    cores = []
    rest = field
    rank = 1
    for n in field.shape[:-1]:
        rest = rest.reshape(rank * n, -1)
        u, s, vt = np.linalg.svd(rest, full_matrices=False)
        new_rank = _truncation_rank(s, delta, max_rank)
        cores.append(u[:, :new_rank].reshape(rank, n, new_rank))
        rest = s[:new_rank, None] * vt[:new_rank]
        rank = new_rank
    cores.append(rest.reshape(rank, field.shape[-1], 1))
    return TTTensor(tuple(cores))


def tt_to_dense(x: TTTensor, size_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Contract all cores into a dense array.

    Raises:
        SizeCapExceeded: The dense array would exceed ``size_cap`` elements
    """
    total = int(np.prod(x.mode_sizes))
    if total > size_cap:
        raise SizeCapExceeded(total, size_cap)
    out = x.cores[0].reshape(x.mode_sizes[0], -1)
    for core in x.cores[1:]:
        out = (out @ core.reshape(core.shape[0], -1)).reshape(-1, core.shape[2])
    return out.reshape(x.mode_sizes)


def tt_evaluate(x: TTTensor, indices: np.ndarray) -> np.ndarray:
    """Elements of ``x`` at a batch of multi-indices, one per row."""
    indices = np.asarray(indices, dtype=int)
    if indices.ndim != 2 or indices.shape[1] != x.ndim:
        raise ShapeMismatchError((len(indices), x.ndim), indices.shape, "index batch")
    values = x.cores[0][0, indices[:, 0], :]
    for k in range(1, x.ndim):
        values = np.einsum("mr,rms->ms", values, x.cores[k][:, indices[:, k], :])
    return values[:, 0]


# ==================== Arithmetic ====================

def tt_add(x: TTTensor, y: TTTensor) -> TTTensor:
    """Sum with block cores; ranks add."""
    _check_modes(x, y, "tt_add operands")
    if x.ndim == 1:
        return TTTensor((x.cores[0] + y.cores[0],))
    cores = [np.concatenate([x.cores[0], y.cores[0]], axis=2)]
    for a, b in zip(x.cores[1:-1], y.cores[1:-1]):
        core = np.zeros((a.shape[0] + b.shape[0], a.shape[1], a.shape[2] + b.shape[2]))
        core[:a.shape[0], :, :a.shape[2]] = a
        core[a.shape[0]:, :, a.shape[2]:] = b
        cores.append(core)
    cores.append(np.concatenate([x.cores[-1], y.cores[-1]], axis=0))
    return TTTensor(tuple(cores))


def tt_scale(x: TTTensor, alpha: float) -> TTTensor:
    return TTTensor((alpha * x.cores[0],) + x.cores[1:])


def tt_hadamard(x: TTTensor, y: TTTensor) -> TTTensor:
    """Elementwise product; ranks multiply."""
    _check_modes(x, y, "tt_hadamard operands")
    cores = []
    for a, b in zip(x.cores, y.cores):
        core = np.einsum("aib,cid->acibd", a, b)
        cores.append(core.reshape(a.shape[0] * b.shape[0], a.shape[1], a.shape[2] * b.shape[2]))
    return TTTensor(tuple(cores))


def tt_dot(x: TTTensor, y: TTTensor) -> float:
    """Frobenius inner product."""
    _check_modes(x, y, "tt_dot operands")
    v = np.ones((1, 1))
    for a, b in zip(x.cores, y.cores):
        v = np.einsum("ab,aic,bid->cd", v, a, b)
    return float(v[0, 0])


def tt_norm(x: TTTensor) -> float:
    """Frobenius norm via a left-orthogonalization sweep."""
    r = np.ones((1, 1))
    for core in x.cores[:-1]:
        core = np.tensordot(r, core, axes=(1, 0))
        _, r = np.linalg.qr(core.reshape(-1, core.shape[2]))
    return float(np.linalg.norm(np.tensordot(r, x.cores[-1], axes=(1, 0))))


def tt_sum(terms: Sequence[TTTensor], eps: float, max_rank: Optional[int] = None) -> TTTensor:
    """Sum of several tensors, rounded after each addition."""
    total = terms[0]
    for term in terms[1:]:
        total = tt_round(tt_add(total, term), eps, max_rank)
    return total


def compression_ratio(x: TTTensor) -> float:
    """Stored TT entries divided by the number of entries of the full tensor."""
    return x.size / float(np.prod(x.mode_sizes))


# ==================== Rounding ====================

def _right_orthogonalize(cores: List[np.ndarray]) -> None:
    for k in range(len(cores) - 1, 0, -1):
        r0, n, r1 = cores[k].shape
        q, r = np.linalg.qr(cores[k].reshape(r0, n * r1).T)
        cores[k] = q.T.reshape(-1, n, r1)
        cores[k - 1] = np.tensordot(cores[k - 1], r.T, axes=(2, 0))


def tt_round(x: TTTensor, eps: float, max_rank: Optional[int] = None) -> TTTensor:
    """
    TT rounding: right-to-left QR sweep, then left-to-right truncated SVD sweep.

    Guarantees ``||x - result|| <= eps * ||x||`` when ``max_rank`` does not bind.
    """
    if eps < 0:
        raise ValueError(f"Truncation tolerance must be non-negative, got {eps}")
    d = x.ndim
    if d == 1:
        return x
    cores = list(x.cores)
    _right_orthogonalize(cores)
    delta = eps * float(np.linalg.norm(cores[0])) / np.sqrt(d - 1)
    for k in range(d - 1):
        r0, n, r1 = cores[k].shape
        u, s, vt = np.linalg.svd(cores[k].reshape(r0 * n, r1), full_matrices=False)
        rank = _truncation_rank(s, delta, max_rank)
        cores[k] = u[:, :rank].reshape(r0, n, rank)
        cores[k + 1] = np.tensordot(s[:rank, None] * vt[:rank], cores[k + 1], axes=(1, 0))
    return TTTensor(tuple(cores))


# ==================== Matrices ====================

@dataclass(frozen=True)
class TTMatrix:
    """Operator in TT format with cores of shape (r_{k-1}, n_out, n_in, r_k)."""

    cores: Tuple[np.ndarray, ...]

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=float) for c in self.cores)
        for k, core in enumerate(cores):
            if core.ndim != 4:
                raise ShapeMismatchError((4,), (core.ndim,), f"matrix core {k} dimensionality")
        if cores[0].shape[0] != 1 or cores[-1].shape[3] != 1:
            raise ShapeMismatchError((1, 1), (cores[0].shape[0], cores[-1].shape[3]), "boundary ranks")
        for k in range(len(cores) - 1):
            if cores[k].shape[3] != cores[k + 1].shape[0]:
                raise ShapeMismatchError(
                    (cores[k].shape[3],), (cores[k + 1].shape[0],), f"rank between cores {k} and {k + 1}"
                )
        object.__setattr__(self, "cores", cores)

    @property
    def ndim(self) -> int:
        return len(self.cores)

    @property
    def row_sizes(self) -> Tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def col_sizes(self) -> Tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores)

    @property
    def ranks(self) -> Tuple[int, ...]:
        return tuple(c.shape[3] for c in self.cores[:-1])

    def matvec(self, x: TTTensor, eps: Optional[float] = None) -> TTTensor:
        """Apply to ``x``, rounding at ``eps`` when given."""
        y = tt_matvec(self, x)
        return y if eps is None else tt_round(y, eps)

    def __add__(self, other: "TTMatrix") -> "TTMatrix":
        return tt_matrix_add(self, other)

    def __sub__(self, other: "TTMatrix") -> "TTMatrix":
        return tt_matrix_add(self, tt_matrix_scale(other, -1.0))

    def __mul__(self, alpha: float) -> "TTMatrix":
        return tt_matrix_scale(self, alpha)

    __rmul__ = __mul__


def tt_kron(factors: Sequence[np.ndarray], scale: float = 1.0) -> TTMatrix:
    """Rank-1 TT matrix ``scale * (F_1 kron ... kron F_d)``."""
    cores = [np.asarray(f, dtype=float)[None, :, :, None] for f in factors]
    cores[0] = scale * cores[0]
    return TTMatrix(tuple(cores))


def tt_identity(mode_sizes: Sequence[int]) -> TTMatrix:
    return tt_kron([np.eye(n) for n in mode_sizes])


def tt_diag(v: TTTensor) -> TTMatrix:
    """Lift a tensor to the TT matrix acting as elementwise multiplication by it."""
    cores = []
    for core in v.cores:
        n = core.shape[1]
        cores.append(np.einsum("aib,ij->aijb", core, np.eye(n)))
    return TTMatrix(tuple(cores))


def tt_matvec(a: TTMatrix, x: TTTensor) -> TTTensor:
    """Matrix-vector product; output ranks are products of the operand ranks."""
    if a.col_sizes != x.mode_sizes:
        raise ShapeMismatchError(a.col_sizes, x.mode_sizes, "tt_matvec operand")
    cores = []
    for g, h in zip(a.cores, x.cores):
        core = np.einsum("aijc,bjd->abicd", g, h)
        cores.append(core.reshape(g.shape[0] * h.shape[0], g.shape[1], g.shape[3] * h.shape[2]))
    return TTTensor(tuple(cores))


def tt_matmat(a: TTMatrix, b: TTMatrix) -> TTMatrix:
    """Matrix-matrix product ``a @ b``."""
    if a.col_sizes != b.row_sizes:
        raise ShapeMismatchError(a.col_sizes, b.row_sizes, "tt_matmat operand")
    cores = []
    for g, h in zip(a.cores, b.cores):
        core = np.einsum("aijc,bjld->abilcd", g, h)
        cores.append(core.reshape(
            g.shape[0] * h.shape[0], g.shape[1], h.shape[2], g.shape[3] * h.shape[3]
        ))
    return TTMatrix(tuple(cores))


def _as_tensor(a: TTMatrix) -> TTTensor:
    return TTTensor(tuple(c.reshape(c.shape[0], c.shape[1] * c.shape[2], c.shape[3]) for c in a.cores))


def _as_matrix(x: TTTensor, like: TTMatrix) -> TTMatrix:
    return TTMatrix(tuple(
        c.reshape(c.shape[0], rows, cols, c.shape[2])
        for c, rows, cols in zip(x.cores, like.row_sizes, like.col_sizes)
    ))


def tt_matrix_add(a: TTMatrix, b: TTMatrix) -> TTMatrix:
    if a.row_sizes != b.row_sizes or a.col_sizes != b.col_sizes:
        raise ShapeMismatchError(a.row_sizes + a.col_sizes, b.row_sizes + b.col_sizes, "tt_matrix_add operands")
    return _as_matrix(tt_add(_as_tensor(a), _as_tensor(b)), a)


def tt_matrix_scale(a: TTMatrix, alpha: float) -> TTMatrix:
    return TTMatrix((alpha * a.cores[0],) + a.cores[1:])


def tt_matrix_round(a: TTMatrix, eps: float, max_rank: Optional[int] = None) -> TTMatrix:
    """Round a TT matrix as a tensor with merged (out, in) modes."""
    return _as_matrix(tt_round(_as_tensor(a), eps, max_rank), a)


def tt_matrix_to_dense(a: TTMatrix, size_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Assemble the explicit matrix, rows and columns flattened in C order."""
    rows, cols = int(np.prod(a.row_sizes)), int(np.prod(a.col_sizes))
    if rows * cols > size_cap:
        raise SizeCapExceeded(rows * cols, size_cap)
    full = tt_to_dense(_as_tensor(a), size_cap)
    d = a.ndim
    full = full.reshape([s for pair in zip(a.row_sizes, a.col_sizes) for s in pair])
    full = full.transpose(list(range(0, 2 * d, 2)) + list(range(1, 2 * d, 2)))
    return full.reshape(rows, cols)


# ==================== Maxvol ====================

def maxvol(
    m: np.ndarray,
    tol: float = DEFAULT_MAXVOL_TOL,
    max_sweeps: int = DEFAULT_MAXVOL_SWEEPS,
) -> np.ndarray:
    """
    Rows of a tall matrix spanning a dominant (locally maximum-volume) submatrix.

    Starts from QR with column pivoting of ``m.T`` and swaps rows while some
    entry of ``m @ inv(m[rows])`` exceeds ``1 + tol`` in modulus.

    Raises:
        ValueError: More columns than rows
        RankDeficiencyError: ``m`` does not have full column rank
    """
    m = np.asarray(m, dtype=float)
    n, r = m.shape
    if n < r:
        raise ValueError(f"maxvol needs a tall matrix, got shape {m.shape}")
    if r == 0:
        return np.zeros(0, dtype=int)
    _, r_factor, pivots = scipy.linalg.qr(m.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r_factor))
    if diag[0] == 0.0 or diag[-1] <= RANK_TOL * diag[0]:
        raise RankDeficiencyError(int(np.sum(diag > RANK_TOL * diag[0])), r)

    rows = pivots[:r].copy()
    coeffs = np.linalg.solve(m[rows].T, m.T).T
    for _ in range(max_sweeps):
        i, j = np.unravel_index(np.argmax(np.abs(coeffs)), coeffs.shape)
        pivot = coeffs[i, j]
        if abs(pivot) <= 1.0 + tol:
            break
        rows[j] = i
        row = coeffs[i].copy()
        row[j] -= 1.0
        coeffs -= np.outer(coeffs[:, j], row / pivot)
    return rows


# ==================== Cross interpolation ====================

@dataclass
class CrossResult:
    """Outcome of cross interpolation.

    Attributes:
        tensor: Interpolant
        validation_error: Relative error on the validation index set
        converged: True if ``validation_error <= eps``
        evaluations: Number of function values requested
    """

    tensor: TTTensor
    validation_error: float
    converged: bool
    evaluations: int


class _CountingEvaluator:
    def __init__(self, f: IndexEvaluator):
        self.f = f
        self.evaluations = 0

    def __call__(self, indices: np.ndarray) -> np.ndarray:
        values = np.asarray(self.f(indices), dtype=float).reshape(-1)
        if values.shape[0] != indices.shape[0]:
            raise ShapeMismatchError((indices.shape[0],), values.shape, "evaluator output")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("cross evaluator output")
        self.evaluations += indices.shape[0]
        return values


def _fiber_matrix(evaluator: _CountingEvaluator, left: np.ndarray, n: int, right: np.ndarray) -> np.ndarray:
    """Values at left x {0..n-1} x right, shaped (len(left) * n, len(right))."""
    rl, rr = left.shape[0], right.shape[0]
    indices = np.hstack([
        np.repeat(left, n * rr, axis=0),
        np.tile(np.repeat(np.arange(n), rr), rl)[:, None],
        np.tile(right, (rl * n, 1)),
    ])
    return evaluator(indices).reshape(rl * n, rr)


def _sample_distinct(sizes: Sequence[int], count: int, rng: np.random.Generator, existing=()) -> np.ndarray:
    """Up to ``count`` distinct multi-indices over ``sizes``, keeping ``existing`` first."""
    count = min(count, int(np.prod(sizes)))
    chosen = [tuple(int(v) for v in row) for row in existing]
    seen = set(chosen)
    while len(chosen) < count:
        candidate = tuple(int(rng.integers(n)) for n in sizes)
        if candidate not in seen:
            seen.add(candidate)
            chosen.append(candidate)
    return np.array(chosen, dtype=int).reshape(len(chosen), len(sizes))


def _left_to_right(evaluator, sizes, right_sets, tol):
    d = len(sizes)
    left = np.zeros((1, 0), dtype=int)
    cores, left_sets = [], []
    for k in range(d - 1):
        fiber = _fiber_matrix(evaluator, left, sizes[k], right_sets[k])
        q, _ = np.linalg.qr(fiber)
        rows = maxvol(q, tol)
        core = np.linalg.solve(q[rows].T, q.T).T
        cores.append(core.reshape(left.shape[0], sizes[k], len(rows)))
        left = np.hstack([left[rows // sizes[k]], (rows % sizes[k])[:, None]])
        left_sets.append(left)
    last = _fiber_matrix(evaluator, left, sizes[-1], np.zeros((1, 0), dtype=int))
    cores.append(last.reshape(left.shape[0], sizes[-1], 1))
    return cores, left_sets


def _right_to_left(evaluator, sizes, left_sets, tol):
    d = len(sizes)
    right = np.zeros((1, 0), dtype=int)
    right_sets = [None] * (d - 1)
    for k in range(d - 1, 0, -1):
        left = left_sets[k - 1]
        rr = right.shape[0]
        fiber = _fiber_matrix(evaluator, left, sizes[k], right)
        q, _ = np.linalg.qr(fiber.reshape(left.shape[0], sizes[k] * rr).T)
        cols = maxvol(q, tol)
        right = np.hstack([(cols // rr)[:, None], right[cols % rr]])
        right_sets[k - 1] = right
    return right_sets


def _validation_set(sizes: Sequence[int], size: int, rng: np.random.Generator) -> np.ndarray:
    total = int(np.prod(sizes))
    if total <= max(size, EXHAUSTIVE_VALIDATION_LIMIT):
        return np.indices(sizes).reshape(len(sizes), -1).T
    return np.column_stack([rng.integers(n, size=size) for n in sizes])


def cross_interpolate(
    f: IndexEvaluator,
    mode_sizes: Sequence[int],
    eps: float,
    rank_cap: int = DEFAULT_CROSS_RANK_CAP,
    rank_step: int = DEFAULT_CROSS_RANK_STEP,
    sweeps: int = DEFAULT_CROSS_SWEEPS,
    validation_size: int = DEFAULT_VALIDATION_SIZE,
    norm_floor: float = 0.0,
    seed: Optional[int] = 0,
    maxvol_tol: float = DEFAULT_MAXVOL_TOL,
) -> CrossResult:
    """
    Rank-adaptive TT cross interpolation with maxvol pivots.

    Alternating left/right sweeps refine the pivot sets at fixed rank; the rank
    grows by ``rank_step`` until the relative error on a random validation set
    drops to ``eps`` or ``rank_cap`` is reached. ``f`` receives an integer array
    of multi-indices (one per row) and is never called on the whole index box
    unless the box is small enough for exhaustive validation.

    Args:
        f: Vectorized evaluator of tensor entries
        mode_sizes: Index box
        eps: Target relative error
        rank_cap: Largest rank tried
        rank_step: Rank increment between rounds
        sweeps: Left/right sweep pairs per rank
        validation_size: Random validation indices
        norm_floor: RMS magnitude used instead of the sampled RMS when the latter
            is smaller, so near-zero tensors are resolved absolutely
        seed: Seed of the pivot and validation sampler
        maxvol_tol: Dominance tolerance of maxvol

    Returns:
        CrossResult holding the best interpolant found
    """
    sizes = tuple(int(n) for n in mode_sizes)
    d = len(sizes)
    rng = np.random.default_rng(seed)
    evaluator = _CountingEvaluator(f)

    validation = _validation_set(sizes, validation_size, rng)
    reference = evaluator(validation)
    scale = max(float(np.linalg.norm(reference)), norm_floor * np.sqrt(len(reference)))
    if scale == 0.0:
        return CrossResult(tt_zeros(sizes), 0.0, True, evaluator.evaluations)
    if d == 1:
        values = evaluator(np.arange(sizes[0])[:, None])
        return CrossResult(TTTensor((values.reshape(1, -1, 1),)), 0.0, True, evaluator.evaluations)

    rank = 1
    right_sets = [_sample_distinct(sizes[k + 1:], rank, rng) for k in range(d - 1)]
    best: Optional[CrossResult] = None
    while True:
        for _ in range(sweeps):
            _, left_sets = _left_to_right(evaluator, sizes, right_sets, maxvol_tol)
            right_sets = _right_to_left(evaluator, sizes, left_sets, maxvol_tol)
        cores, _ = _left_to_right(evaluator, sizes, right_sets, maxvol_tol)
        tensor = TTTensor(tuple(cores))
        error = float(np.linalg.norm(tt_evaluate(tensor, validation) - reference)) / scale
        logger.debug(f"Cross rank {rank}: ranks {tensor.ranks}, validation error {error:.3e}")
        if best is None or error < best.validation_error:
            best = CrossResult(tensor, error, error <= eps, evaluator.evaluations)
        if error <= eps or rank >= rank_cap:
            break
        rank = min(rank + rank_step, rank_cap)
        right_sets = [_sample_distinct(sizes[k + 1:], rank, rng, right_sets[k]) for k in range(d - 1)]

    best.evaluations = evaluator.evaluations
    if not best.converged:
        logger.warning(
            f"Cross interpolation reached rank cap {rank_cap} with validation error "
            f"{best.validation_error:.3e} > {eps:.3e}"
        )
    return best


def tt_cross(
    f: IndexEvaluator,
    mode_sizes: Sequence[int],
    eps: float,
    rank_cap: int = DEFAULT_CROSS_RANK_CAP,
    **options,
) -> TTTensor:
    """Cross interpolation returning only the tensor; see cross_interpolate."""
    return cross_interpolate(f, mode_sizes, eps, rank_cap, **options).tensor
