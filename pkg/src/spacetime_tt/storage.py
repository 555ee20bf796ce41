"""
ResultStorage - Local storage for run reports and TT checkpoints.

Keeps JSON Newton reports and binary TT-core checkpoints of experiment
runs so long solves can be inspected or resumed later.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import ValidationError
from .report import NewtonReport
from .tt_core import TTTensor
from .validation import validate_report

logger = logging.getLogger(__name__)

# Configuration constants
DEFAULT_CHECKPOINT_KEEP_COUNT = 50
JSON_INDENT = 2
FILE_ENCODING = 'utf-8'
TT_MAGIC = b"STT1"
TT_DTYPE = np.dtype("<f8")
_UINT32 = struct.Struct("<I")
_CORE_SHAPE = struct.Struct("<III")


# ==================== TT codec ====================

def save_tt(path: Path, x: TTTensor) -> None:
    """
    Write TT cores to a binary file.

    Layout: magic ``STT1``, uint32 core count, then per core three uint32
    shape entries followed by the core values as little-endian float64 in
    C order.
    """
    with open(path, "wb") as f:
        f.write(TT_MAGIC)
        f.write(_UINT32.pack(x.ndim))
        for core in x.cores:
            f.write(_CORE_SHAPE.pack(*core.shape))
            f.write(np.ascontiguousarray(core, dtype=TT_DTYPE).tobytes())


def load_tt(path: Path) -> TTTensor:
    """
    Read TT cores written by ``save_tt``.

    Raises:
        ValidationError: Bad magic, truncated data or inconsistent ranks
    """
    data = Path(path).read_bytes()
    if data[:len(TT_MAGIC)] != TT_MAGIC:
        raise ValidationError(f"{path} is not a TT checkpoint (bad magic)")
    offset = len(TT_MAGIC)
    try:
        (ndim,) = _UINT32.unpack_from(data, offset)
        offset += _UINT32.size
        cores = []
        for _ in range(ndim):
            shape = _CORE_SHAPE.unpack_from(data, offset)
            offset += _CORE_SHAPE.size
            count = int(np.prod(shape))
            end = offset + count * TT_DTYPE.itemsize
            if end > len(data):
                raise ValidationError(f"{path} is truncated")
            cores.append(np.frombuffer(data[offset:end], dtype=TT_DTYPE).reshape(shape).copy())
            offset = end
    except struct.error as e:
        raise ValidationError(f"{path} is truncated: {e}") from e
    if offset != len(data):
        raise ValidationError(f"{path} has {len(data) - offset} trailing bytes")
    try:
        return TTTensor(tuple(cores))
    except ValueError as e:
        raise ValidationError(f"{path} holds inconsistent cores: {e}") from e


class ResultStorage:
    """
    Local storage manager for run reports and TT checkpoints.

    Storage directory structure:
        ~/.spacetime_tt/
        ├── reports/
        │   ├── manufactured-tt-step-trunc-N12.json
        │   └── ...
        └── checkpoints/
            ├── burgers-tt-fixed-eps-N16.stt
            └── ...

    Writes are fail-safe: storage errors are logged and reported through the
    return value, never raised.
    """

    REPORT_SUFFIX = ".json"
    CHECKPOINT_SUFFIX = ".stt"

    def __init__(self, base_path: Optional[Path] = None):
        """
        Initialize storage with base directory.

        Args:
            base_path: Base storage directory (defaults to ~/.spacetime_tt/)
        """
        if base_path is None:
            base_path = Path.home() / ".spacetime_tt"

        self.base_path = Path(base_path)
        self.reports_dir = self.base_path / "reports"
        self.checkpoints_dir = self.base_path / "checkpoints"

        self._ensure_dirs()

    def _write_json_file(self, file_path: Path, data: Dict[str, Any]) -> None:
        with open(file_path, 'w', encoding=FILE_ENCODING) as f:
            json.dump(data, f, indent=JSON_INDENT, ensure_ascii=False)

    def _read_json_file(self, file_path: Path) -> Dict[str, Any]:
        with open(file_path, 'r', encoding=FILE_ENCODING) as f:
            return json.load(f)

    def _ensure_dirs(self) -> None:
        try:
            self.reports_dir.mkdir(parents=True, exist_ok=True)
            self.checkpoints_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.warning(f"Failed to create storage directories: {e}")

    # ==================== Reports ====================

    def save_report(self, name: str, report: NewtonReport) -> bool:
        """
        Save a Newton report as JSON.

        Args:
            name: Report name (used as filename)
            report: Report to save

        Returns:
            True if saved successfully, False on error or schema violation
        """
        data = report.to_dict()
        result = validate_report(data)
        if not result:
            logger.warning(f"Refusing to save report '{name}': {result}")
            return False
        try:
            self._write_json_file(self.reports_dir / f"{name}{self.REPORT_SUFFIX}", data)
            return True
        except (OSError, ValueError, TypeError) as e:
            logger.warning(f"Failed to save report '{name}': {e}")
            return False

    def load_report(self, name: str) -> Optional[NewtonReport]:
        """
        Load a saved report.

        Returns:
            The report, or None if missing, unreadable or invalid
        """
        try:
            report_file = self.reports_dir / f"{name}{self.REPORT_SUFFIX}"
            if not report_file.exists():
                return None
            data = self._read_json_file(report_file)
            result = validate_report(data)
            if not result:
                logger.warning(f"Stored report '{name}' is invalid: {result}")
                return None
            return NewtonReport.from_dict(data)
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.warning(f"Failed to load report '{name}': {e}")
            return None

    def list_reports(self) -> List[str]:
        try:
            return sorted(f.stem for f in self.reports_dir.glob(f"*{self.REPORT_SUFFIX}"))
        except OSError:
            return []

    def clear_reports(self, name: Optional[str] = None) -> bool:
        """
        Remove one report, or all of them when ``name`` is None.

        Returns:
            True if cleared successfully
        """
        try:
            if name:
                report_file = self.reports_dir / f"{name}{self.REPORT_SUFFIX}"
                if report_file.exists():
                    report_file.unlink()
            else:
                for report_file in self.reports_dir.glob(f"*{self.REPORT_SUFFIX}"):
                    report_file.unlink()
            return True
        except OSError as e:
            logger.warning(f"Failed to clear reports: {e}")
            return False

    # ==================== Checkpoints ====================

    def save_checkpoint(self, name: str, x: TTTensor) -> bool:
        try:
            save_tt(self.checkpoints_dir / f"{name}{self.CHECKPOINT_SUFFIX}", x)
            return True
        except OSError as e:
            logger.warning(f"Failed to save checkpoint '{name}': {e}")
            return False

    def load_checkpoint(self, name: str) -> Optional[TTTensor]:
        """Load a checkpoint; None if missing or malformed."""
        checkpoint_file = self.checkpoints_dir / f"{name}{self.CHECKPOINT_SUFFIX}"
        if not checkpoint_file.exists():
            return None
        try:
            return load_tt(checkpoint_file)
        except (OSError, ValidationError) as e:
            logger.warning(f"Failed to load checkpoint '{name}': {e}")
            return None

    def list_checkpoints(self, limit: Optional[int] = None) -> List[str]:
        """
        List checkpoint names, most recent first.

        Args:
            limit: Maximum number of names to return
        """
        try:
            files = list(self.checkpoints_dir.glob(f"*{self.CHECKPOINT_SUFFIX}"))
            files.sort(key=lambda f: f.stat().st_mtime, reverse=True)
        except OSError:
            return []
        if limit:
            files = files[:limit]
        return [f.stem for f in files]

    def cleanup_checkpoints(self, keep_recent: int = DEFAULT_CHECKPOINT_KEEP_COUNT) -> int:
        """
        Remove old checkpoints, keeping the N most recent.

        Returns:
            Number of checkpoints deleted
        """
        deleted = 0
        try:
            files = list(self.checkpoints_dir.glob(f"*{self.CHECKPOINT_SUFFIX}"))
            files.sort(key=lambda f: f.stat().st_mtime, reverse=True)
            for old in files[keep_recent:]:
                old.unlink()
                deleted += 1
        except OSError as e:
            logger.warning(f"Failed to cleanup checkpoints: {e}")
        return deleted
