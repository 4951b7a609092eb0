import json

import pytest

from src.database import ArchiveManager
from src.errors import ConfigError


@pytest.fixture
def archive_config(tmp_path):
    path = tmp_path / "database.json"
    path.write_text(json.dumps({
        "database": {
            "path": str(tmp_path / "data" / "runs.db"),
            "backup_path": str(tmp_path / "backups"),
            "enable_wal_mode": True,
            "enable_foreign_keys": True,
        }
    }))
    return path


@pytest.fixture
def archive(archive_config):
    return ArchiveManager(str(archive_config))


class TestArchiveManager:
    def test_creates_database(self, archive, tmp_path):
        assert (tmp_path / "data" / "runs.db").exists()
        info = archive.get_database_info()
        assert info["tables"] == {"runs": 0, "run_steps": 0, "run_conditions": 0}

    def test_archive_and_list(self, archive, sample_report):
        first = archive.archive_run(sample_report(), output_dir="runs/a")
        halt = {"nu": 0, "kind": "divisor", "message": "resonant", "details": {}}
        report = sample_report(halt=halt)
        report["exit_code"] = 1
        second = archive.archive_run(report, output_dir="runs/b")
        assert second > first
        runs = archive.list_runs()
        assert [run["id"] for run in runs] == [second, first]
        assert runs[0]["exit_code"] == 1
        assert runs[1]["steps"] == 2
        assert runs[1]["output_dir"] == "runs/a"
        assert archive.get_database_info()["tables"] == {"runs": 2, "run_steps": 4, "run_conditions": 6}

    def test_limit(self, archive, sample_report):
        for _ in range(3):
            archive.archive_run(sample_report())
        assert len(archive.list_runs(limit=2)) == 2

    def test_config_echo(self, archive, sample_report):
        run_id = archive.archive_run(sample_report())
        assert archive.run_config(run_id) == {"mode": "frequency_preserving:6"}
        with pytest.raises(KeyError):
            archive.run_config(run_id + 100)

    def test_env_selects_config(self, archive_config, monkeypatch):
        monkeypatch.setenv("KAM_ENGINE_DB_CONFIG", str(archive_config))
        assert ArchiveManager().config_path == str(archive_config)

    def test_missing_config(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ArchiveManager(str(tmp_path / "nope.json"))

    def test_config_without_path(self, tmp_path):
        path = tmp_path / "database.json"
        path.write_text('{"database": {}}')
        with pytest.raises(ConfigError):
            ArchiveManager(str(path))

    def test_backup(self, archive, sample_report, tmp_path):
        archive.archive_run(sample_report())
        backup = archive.backup_database()
        assert backup.startswith(str(tmp_path / "backups"))
