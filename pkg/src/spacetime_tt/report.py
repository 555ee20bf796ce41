"""
Newton Reports - per-iteration history of full-grid and TT Newton solves.

Reports are plain dataclasses that serialize to JSON-ready dictionaries
(see ``schemas/run-report.json``).
"""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

# Stopping criteria recorded in NewtonReport.criterion
CRITERION_RESIDUAL = "residual"
CRITERION_UPDATE = "update"
CRITERION_MAX_ITER = "max_iter"
CRITERION_ZERO_RESIDUAL = "zero_residual"
CRITERIA = (
    CRITERION_RESIDUAL,
    CRITERION_UPDATE,
    CRITERION_MAX_ITER,
    CRITERION_ZERO_RESIDUAL,
)


@dataclass
class IterationRecord:
    """One accepted Newton step.

    ``line_search_exhausted`` marks a step taken at the smallest step factor
    after every halving failed to reduce the residual.

    ``previous_residual_norm`` is the norm the line search compared against;
    for TT runs it is re-evaluated at the current truncation tolerance.
    """

    residual_norm: float
    previous_residual_norm: float
    update_norm: float
    step_factor: float
    elapsed: float
    linear_iterations: int = 0
    eps: Optional[float] = None
    ranks: Optional[Tuple[int, ...]] = None
    compression_ratio: Optional[float] = None
    line_search_exhausted: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.ranks is not None:
            data["ranks"] = list(self.ranks)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IterationRecord":
        data = dict(data)
        if data.get("ranks") is not None:
            data["ranks"] = tuple(data["ranks"])
        return cls(**data)


@dataclass
class NewtonReport:
    """
    History and outcome of one Newton solve.

    ``residual_norms`` starts with the initial residual and then lists the
    residual after every accepted step. Each step satisfies
    ``residual_norm <= previous_residual_norm`` unless its line search was
    exhausted. Full-grid runs compare against the previous entry, so their
    list is non-increasing. TT runs re-evaluate the residual whenever the
    truncation tolerance tightens, and consecutive entries may then differ
    by the truncation error.
    """

    solver: str = "fullgrid"
    initial_residual: float = 0.0
    initial_eps: Optional[float] = None
    initial_ranks: Optional[Tuple[int, ...]] = None
    history: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    criterion: Optional[str] = None
    wall_time: float = 0.0
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def record(self, entry: IterationRecord) -> None:
        self.history.append(entry)

    def finish(self, converged: bool, criterion: str, wall_time: float) -> None:
        self.converged = converged
        self.criterion = criterion
        self.wall_time = wall_time

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def residual_norms(self) -> List[float]:
        return [self.initial_residual] + [h.residual_norm for h in self.history]

    @property
    def final_residual(self) -> float:
        return self.residual_norms[-1]

    @property
    def relative_residual(self) -> float:
        if self.initial_residual == 0.0:
            return 0.0
        return self.final_residual / self.initial_residual

    @property
    def step_factors(self) -> List[float]:
        return [h.step_factor for h in self.history]

    @property
    def exhausted_steps(self) -> int:
        return sum(1 for h in self.history if h.line_search_exhausted)

    @property
    def eps_history(self) -> List[float]:
        trace = [] if self.initial_eps is None else [self.initial_eps]
        return trace + [h.eps for h in self.history if h.eps is not None]

    @property
    def compression_ratios(self) -> List[float]:
        return [h.compression_ratio for h in self.history if h.compression_ratio is not None]

    @property
    def max_rank(self) -> Optional[int]:
        ranks = [max(h.ranks) for h in self.history if h.ranks]
        if self.initial_ranks:
            ranks.append(max(self.initial_ranks))
        return max(ranks) if ranks else None

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary for serialization."""
        return {
            "solver": self.solver,
            "initial_residual": self.initial_residual,
            "initial_eps": self.initial_eps,
            "initial_ranks": list(self.initial_ranks) if self.initial_ranks else None,
            "history": [h.to_dict() for h in self.history],
            "converged": self.converged,
            "criterion": self.criterion,
            "wall_time": self.wall_time,
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NewtonReport":
        """Create report from dictionary."""
        data = dict(data)
        data["history"] = [IterationRecord.from_dict(h) for h in data.get("history", [])]
        if data.get("initial_ranks") is not None:
            data["initial_ranks"] = tuple(data["initial_ranks"])
        if isinstance(data.get("created_at"), str):
            data["created_at"] = datetime.fromisoformat(data["created_at"])
        return cls(**data)
