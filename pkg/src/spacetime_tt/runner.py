"""
Experiment Runner - runs experiments across solver variants and compares results.

Each (N, solver) cell of a run becomes one ResultRow. Solver failures are
recorded in the row's status and the run continues.
"""

import csv
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import ExperimentConfig
from .errors import SchemaMismatchError
from .fullgrid_solver import newton_iterate, newton_solve, relative_error
from .problems import experiment1_rootfind, get_problem
from .report import NewtonReport
from .storage import ResultStorage
from .tt_core import TTTensor, compression_ratio, tt_norm, tt_to_dense
from .tt_solver import SpaceTimeTTSystem, step_truncation_newton
from .validation import RESULT_COLUMNS, validate_result_header

logger = logging.getLogger(__name__)

# Row status values
STATUS_OK = "ok"
STATUS_NOT_CONVERGED = "not_converged"
STATUS_ERROR_PREFIX = "error"
BASELINE_SOLVER = "fullgrid"
FLOAT_FORMAT = ".6e"
REPORTS_SUFFIX = ".reports"


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def _parse_float(text: str) -> Optional[float]:
    return float(text) if text.strip() else None


def _parse_int(text: str) -> Optional[int]:
    return int(text) if text.strip() else None


@dataclass
class ResultRow:
    """One CSV row: the outcome of a single (experiment, solver, N) solve."""

    experiment: str
    solver: str
    N: int
    rel_error: Optional[float] = None
    resid_final: Optional[float] = None
    newton_iters: Optional[int] = None
    wall_s: Optional[float] = None
    max_rank: Optional[int] = None
    cr: Optional[float] = None
    status: str = STATUS_OK
    report: Optional[NewtonReport] = field(default=None, repr=False, compare=False)
    solution: Optional[TTTensor] = field(default=None, repr=False, compare=False)

    @property
    def name(self) -> str:
        return f"{self.experiment}-{self.solver}-N{self.N}"

    @property
    def failed(self) -> bool:
        return self.status.startswith(STATUS_ERROR_PREFIX)

    def to_csv_dict(self) -> Dict[str, str]:
        return {column: _format(getattr(self, column)) for column in RESULT_COLUMNS}

    @classmethod
    def from_csv_dict(cls, data: Dict[str, str]) -> "ResultRow":
        return cls(
            experiment=data["experiment"],
            solver=data["solver"],
            N=int(data["N"]),
            rel_error=_parse_float(data["rel_error"]),
            resid_final=_parse_float(data["resid_final"]),
            newton_iters=_parse_int(data["newton_iters"]),
            wall_s=_parse_float(data["wall_s"]),
            max_rank=_parse_int(data["max_rank"]),
            cr=_parse_float(data["cr"]),
            status=data["status"],
        )


class ExperimentRunner:
    """
    Runs one experiment configuration.

    Solver variants:
        fullgrid       dense Newton-GMRES (exact diagonal Newton for exp1)
        tt-fixed-eps   TT Newton with eps_k fixed at eps_tt
        tt-step-trunc  TT Newton starting at eps0, tightened adaptively down to eps_tt
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def cells(self) -> List[Tuple[int, str]]:
        return [(n, solver) for n in self.config.sizes for solver in self.config.solver]

    def run(self) -> List[ResultRow]:
        cells = self.cells()
        logger.info(f"Running {self.config.experiment}: {len(cells)} cells")
        if self.config.parallel and len(cells) > 1:
            with ThreadPoolExecutor(max_workers=min(len(cells), os.cpu_count() or 1)) as pool:
                return list(pool.map(lambda cell: self.run_cell(*cell), cells))
        return [self.run_cell(n, solver) for n, solver in cells]

    def run_cell(self, n: int, solver: str) -> ResultRow:
        """Run one solve; exceptions become an error status on the row."""
        row = ResultRow(experiment=self.config.experiment, solver=solver, N=n)
        start = time.perf_counter()
        try:
            if self.config.experiment == "exp1":
                self._run_rootfind(row)
            elif solver == BASELINE_SOLVER:
                self._run_fullgrid(row)
            else:
                self._run_tt(row)
        except Exception as e:
            logger.warning(f"{row.name} failed: {type(e).__name__}: {e}")
            row.status = f"{STATUS_ERROR_PREFIX}: {type(e).__name__}: {e}"
        row.wall_s = time.perf_counter() - start

        if row.report is not None:
            row.resid_final = row.report.final_residual
            row.newton_iters = row.report.iterations
            if not row.report.converged and not row.failed:
                row.status = STATUS_NOT_CONVERGED
        logger.info(
            f"{row.name}: status={row.status}, rel_error={_format(row.rel_error)}, "
            f"iters={row.newton_iters}, wall={row.wall_s:.2f}s"
        )
        return row

    def _tt_schedule(self, solver: str) -> Tuple[float, float, bool]:
        """Initial tolerance, floor and adaptivity of a TT variant."""
        if solver == "tt-fixed-eps":
            return self.config.tt_tolerance, self.config.tt_tolerance, False
        floor = self.config.truncation_floor
        return max(self.config.eps0, floor), floor, True

    def _finish_tt(self, row: ResultRow, u: TTTensor) -> None:
        row.solution = u
        row.max_rank = row.report.max_rank
        row.cr = compression_ratio(u)

    def _run_fullgrid(self, row: ResultRow) -> None:
        cfg = self.config
        problem = get_problem(cfg.experiment)
        grids = problem.build_grids(row.N)
        u, row.report = newton_solve(
            problem,
            grids,
            tol_res=cfg.tol_res,
            tol_update=cfg.tol_update,
            max_iter=cfg.max_newton,
            restart=cfg.krylov_restart,
            krylov_max_iter=cfg.krylov_max_iter,
        )
        if problem.exact_solution is not None:
            row.rel_error = relative_error(u, problem.exact_solution, grids)

    def _run_tt(self, row: ResultRow) -> None:
        cfg = self.config
        problem = get_problem(cfg.experiment)
        grids = problem.build_grids(row.N)
        eps0, floor, adaptive = self._tt_schedule(row.solver)
        system = SpaceTimeTTSystem(
            problem,
            grids,
            eps_cross=cfg.cross_tolerance,
            seed=cfg.seed,
            restart=cfg.tt_krylov_restart,
            linear_max_iter=cfg.tt_krylov_max_iter,
        )
        u, state = step_truncation_newton(
            system,
            system.initial_guess(eps0),
            eps0=eps0,
            tol_res=cfg.tol_res,
            tol_update=cfg.tol_update,
            max_iter=cfg.max_newton,
            eps_floor=floor,
            adaptive=adaptive,
            solver=row.solver,
        )
        row.report = state.report
        self._finish_tt(row, u)
        if problem.exact_solution is not None:
            row.rel_error = relative_error(system.assemble(u), problem.exact_solution, grids)

    def _run_rootfind(self, row: ResultRow) -> None:
        cfg = self.config
        task = experiment1_rootfind(seed=cfg.seed, mode_sizes=(row.N,) * 4)
        if row.solver == BASELINE_SOLVER:
            residual, correction, y0 = task.dense_system()
            y, row.report = newton_iterate(
                residual, correction, y0, cfg.tol_res, cfg.tol_update, cfg.max_newton, solver=row.solver
            )
            exact = tt_to_dense(task.exact)
            row.rel_error = float(np.linalg.norm(y - exact) / np.linalg.norm(exact))
            return
        eps0, floor, adaptive = self._tt_schedule(row.solver)
        y, state = step_truncation_newton(
            task,
            task.initial_guess(),
            eps0=eps0,
            tol_res=cfg.tol_res,
            tol_update=cfg.tol_update,
            max_iter=cfg.max_newton,
            eps_floor=floor,
            adaptive=adaptive,
            solver=row.solver,
        )
        row.report = state.report
        self._finish_tt(row, y)
        row.rel_error = tt_norm(y - task.exact) / tt_norm(task.exact)


def run_experiment(config: ExperimentConfig) -> List[ResultRow]:
    """Run every (N, solver) cell of ``config``."""
    return ExperimentRunner(config).run()


# ==================== Result files ====================

def reports_dir_for(out: Path) -> Path:
    """Directory holding per-row JSON reports and checkpoints of a result CSV."""
    out = Path(out)
    return out.parent / f"{out.stem}{REPORTS_SUFFIX}"


def write_results(rows: Sequence[ResultRow], out: Path, save_reports: bool = True) -> Path:
    """
    Write result rows as CSV; optionally store each row's report and TT solution.

    Returns:
        Path of the written CSV
    """
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_csv_dict())

    if save_reports:
        storage = ResultStorage(reports_dir_for(out))
        for row in rows:
            if row.report is not None:
                storage.save_report(row.name, row.report)
            if row.solution is not None:
                storage.save_checkpoint(row.name, row.solution)
    logger.info(f"Wrote {len(rows)} rows to {out}")
    return out


def read_results(path: Path) -> List[ResultRow]:
    """
    Read a result CSV.

    Raises:
        SchemaMismatchError: Header differs from RESULT_COLUMNS
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        if not validate_result_header(header):
            raise SchemaMismatchError(
                str(path),
                missing=[c for c in RESULT_COLUMNS if c not in header],
                unexpected=[c for c in header if c not in RESULT_COLUMNS],
            )
        return [ResultRow.from_csv_dict(record) for record in reader]


# ==================== Comparison ====================

SUMMARY_COLUMNS = ("experiment", "N", "solver", "baseline", "speedup", "error_ratio")


@dataclass
class SummaryRow:
    """Speedup and error ratio of one row against its baseline row."""

    experiment: str
    N: int
    solver: str
    baseline: str
    speedup: Optional[float]
    error_ratio: Optional[float]

    def to_csv_dict(self) -> Dict[str, str]:
        return {column: _format(getattr(self, column)) for column in SUMMARY_COLUMNS}


def _ratio(numerator: Optional[float], denominator: Optional[float]) -> Optional[float]:
    if numerator is None or denominator is None or denominator == 0.0:
        return None
    return numerator / denominator


def _summarize(base: ResultRow, row: ResultRow, baseline_label: str) -> SummaryRow:
    return SummaryRow(
        experiment=row.experiment,
        N=row.N,
        solver=row.solver,
        baseline=baseline_label,
        speedup=_ratio(base.wall_s, row.wall_s),
        error_ratio=_ratio(row.rel_error, base.rel_error),
    )


def compare_report(paths: Sequence[Path]) -> List[SummaryRow]:
    """
    Join result files on (experiment, N) and compare variants.

    With one file, every non-fullgrid row is compared against the fullgrid row
    of the same (experiment, N). With several files, the first file is the
    baseline and rows of the other files are compared against the baseline row
    of the same (experiment, N, solver).

    speedup = baseline wall time / row wall time;
    error_ratio = row relative error / baseline relative error.

    Raises:
        SchemaMismatchError: A file does not have the result-table header
    """
    if not paths:
        raise ValueError("compare needs at least one result file")
    tables = [read_results(Path(p)) for p in paths]
    summary: List[SummaryRow] = []

    if len(tables) == 1:
        baseline = {(r.experiment, r.N): r for r in tables[0] if r.solver == BASELINE_SOLVER}
        for row in tables[0]:
            base = baseline.get((row.experiment, row.N))
            if row.solver != BASELINE_SOLVER and base is not None:
                summary.append(_summarize(base, row, BASELINE_SOLVER))
    else:
        baseline = {(r.experiment, r.N, r.solver): r for r in tables[0]}
        label = Path(paths[0]).name
        for table in tables[1:]:
            for row in table:
                base = baseline.get((row.experiment, row.N, row.solver))
                if base is not None:
                    summary.append(_summarize(base, row, label))

    if not summary:
        logger.warning("No comparable rows: the inputs share no (experiment, N) runs")
    return summary


def write_summary(rows: Sequence[SummaryRow], stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=SUMMARY_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_csv_dict())
