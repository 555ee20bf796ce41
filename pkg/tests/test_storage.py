"""
Tests for ResultStorage and the TT checkpoint codec.

Tests cover report persistence and binary TT checkpoints.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from spacetime_tt import ResultStorage
from spacetime_tt.errors import ValidationError
from spacetime_tt.report import NewtonReport
from spacetime_tt.storage import TT_MAGIC, load_tt, save_tt
from spacetime_tt.tt_core import tt_to_dense


class TestResultStorageInitialization:
    """Test storage initialization and directory creation."""

    def test_default_initialization(self, monkeypatch, tmp_path):
        """Test storage defaults to ~/.spacetime_tt."""
        monkeypatch.setenv("HOME", str(tmp_path))
        storage = ResultStorage()

        assert storage.base_path == Path.home() / ".spacetime_tt"
        assert storage.reports_dir == storage.base_path / "reports"
        assert storage.checkpoints_dir == storage.base_path / "checkpoints"

    def test_custom_path_initialization(self, tmp_path):
        """Test storage initializes with custom path and creates directories."""
        storage = ResultStorage(base_path=tmp_path / "custom")

        assert storage.base_path == tmp_path / "custom"
        assert storage.reports_dir.exists()
        assert storage.checkpoints_dir.exists()


class TestReports:
    """Test run report persistence."""

    def test_save_and_load(self, temp_storage, sample_report):
        """Test a saved report loads back unchanged."""
        assert temp_storage.save_report("manufactured-tt-step-trunc-N8", sample_report)

        loaded = temp_storage.load_report("manufactured-tt-step-trunc-N8")
        assert loaded is not None
        assert loaded.solver == "tt-step-trunc"
        assert loaded.converged
        assert loaded.iterations == 2
        assert loaded.history[1].ranks == (3, 4, 3)
        assert loaded.eps_history == [0.1, 0.1, 1e-2]
        assert loaded.created_at == sample_report.created_at

    def test_saved_file_is_json(self, temp_storage, sample_report):
        """Test the file on disk is plain JSON."""
        temp_storage.save_report("run", sample_report)
        data = json.loads((temp_storage.reports_dir / "run.json").read_text(encoding="utf-8"))
        assert data["criterion"] == "residual"
        assert data["initial_ranks"] == [1, 1, 1]

    def test_load_missing(self, temp_storage):
        """Test loading a missing report returns None."""
        assert temp_storage.load_report("nonexistent") is None

    def test_refuses_invalid_report(self, temp_storage):
        """Test a report violating the schema is not written."""
        report = NewtonReport(solver="fullgrid", initial_residual=-1.0)
        report.finish(False, "max_iter", 0.0)

        assert not temp_storage.save_report("bad", report)
        assert temp_storage.list_reports() == []

    def test_load_invalid_file(self, temp_storage):
        """Test a tampered report file loads as None."""
        (temp_storage.reports_dir / "broken.json").write_text('{"solver": 3}', encoding="utf-8")
        assert temp_storage.load_report("broken") is None

    def test_load_corrupted_json(self, temp_storage):
        """Test unparsable JSON loads as None."""
        (temp_storage.reports_dir / "corrupt.json").write_text("{not json", encoding="utf-8")
        assert temp_storage.load_report("corrupt") is None

    def test_list_and_clear(self, temp_storage, sample_report):
        """Test listing and clearing reports."""
        for name in ("b", "a", "c"):
            temp_storage.save_report(name, sample_report)
        assert temp_storage.list_reports() == ["a", "b", "c"]

        assert temp_storage.clear_reports("b")
        assert temp_storage.list_reports() == ["a", "c"]

        assert temp_storage.clear_reports()
        assert temp_storage.list_reports() == []


class TestTTCodec:
    """Test the binary TT checkpoint format."""

    def test_round_trip(self, tmp_path, random_tt):
        """Test cores survive a save/load cycle bit for bit."""
        path = tmp_path / "x.stt"
        save_tt(path, random_tt)
        loaded = load_tt(path)

        assert loaded.ranks == random_tt.ranks
        for a, b in zip(loaded.cores, random_tt.cores):
            np.testing.assert_array_equal(a, b)

    def test_layout(self, tmp_path, random_tt):
        """Test the header and total size."""
        path = tmp_path / "x.stt"
        save_tt(path, random_tt)
        data = path.read_bytes()

        assert data[:4] == TT_MAGIC
        assert int.from_bytes(data[4:8], "little") == 4
        expected = 8 + sum(12 + 8 * core.size for core in random_tt.cores)
        assert len(data) == expected

    def test_bad_magic(self, tmp_path):
        """Test a file without the magic is rejected."""
        path = tmp_path / "x.stt"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(ValidationError, match="bad magic"):
            load_tt(path)

    def test_truncated(self, tmp_path, random_tt):
        """Test a truncated file is rejected."""
        path = tmp_path / "x.stt"
        save_tt(path, random_tt)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValidationError, match="truncated"):
            load_tt(path)

    def test_trailing_bytes(self, tmp_path, random_tt):
        """Test extra bytes after the last core are rejected."""
        path = tmp_path / "x.stt"
        save_tt(path, random_tt)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(ValidationError, match="trailing"):
            load_tt(path)


class TestCheckpoints:
    """Test TT checkpoint management."""

    def test_save_and_load(self, temp_storage, random_tt):
        """Test a checkpoint loads back to the same tensor."""
        assert temp_storage.save_checkpoint("burgers-tt-fixed-eps-N8", random_tt)
        loaded = temp_storage.load_checkpoint("burgers-tt-fixed-eps-N8")
        np.testing.assert_array_equal(tt_to_dense(loaded), tt_to_dense(random_tt))

    def test_load_missing(self, temp_storage):
        """Test a missing checkpoint loads as None."""
        assert temp_storage.load_checkpoint("nonexistent") is None

    def test_load_malformed(self, temp_storage):
        """Test a malformed checkpoint loads as None."""
        (temp_storage.checkpoints_dir / "bad.stt").write_bytes(b"junk")
        assert temp_storage.load_checkpoint("bad") is None

    def test_list_most_recent_first(self, temp_storage, random_tt):
        """Test checkpoints are listed by modification time."""
        now = time.time()
        for age, name in enumerate(("new", "mid", "old")):
            temp_storage.save_checkpoint(name, random_tt)
            path = temp_storage.checkpoints_dir / f"{name}.stt"
            os.utime(path, (now - 100 * age, now - 100 * age))

        assert temp_storage.list_checkpoints() == ["new", "mid", "old"]
        assert temp_storage.list_checkpoints(limit=2) == ["new", "mid"]

    def test_cleanup(self, temp_storage, random_tt):
        """Test cleanup keeps only the most recent checkpoints."""
        now = time.time()
        for age in range(5):
            name = f"cp{age}"
            temp_storage.save_checkpoint(name, random_tt)
            os.utime(temp_storage.checkpoints_dir / f"{name}.stt", (now - 10 * age, now - 10 * age))

        assert temp_storage.cleanup_checkpoints(keep_recent=2) == 3
        assert temp_storage.list_checkpoints() == ["cp0", "cp1"]
