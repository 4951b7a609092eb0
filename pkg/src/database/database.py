"""
SQLite archive of finished runs.
"""

import json
import os
import shutil
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Generator, List, Optional

import structlog
from sqlalchemy import create_engine, event, func, select
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

from ..errors import ConfigError
from .models import Base, ConditionRecord, RunRecord, StepRecord

logger = structlog.get_logger(__name__)

DEFAULT_CONFIG_PATH = "config/database.json"


def default_config_path() -> str:
    return os.environ.get("KAM_ENGINE_DB_CONFIG", DEFAULT_CONFIG_PATH)


class ArchiveManager:
    """Manages the archive database and its sessions."""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or default_config_path()
        self.config = self._load_config(self.config_path)
        self.engine = self._create_engine()
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)
        Base.metadata.create_all(bind=self.engine)

    def _load_config(self, config_path: str) -> dict:
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Database config file not found: {config_path}")
        with open(config_file, 'r') as f:
            try:
                config = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError([f"archive: {config_path} line {e.lineno}, column {e.colno}: {e.msg}"]) from e
        if 'path' not in config.get('database', {}):
            raise ConfigError([f"archive: {config_path} has no database.path"])
        return config

    def _create_engine(self) -> Engine:
        db_config = self.config['database']

        db_path = Path(db_config['path'])
        db_path.parent.mkdir(parents=True, exist_ok=True)

        engine = create_engine(
            f"sqlite:///{db_path}",
            poolclass=StaticPool,
            connect_args={
                "check_same_thread": False,
                "timeout": db_config.get('query_timeout_ms', 30000) / 1000
            }
        )

        if db_config.get('enable_wal_mode', True):
            @event.listens_for(engine, "connect")
            def set_sqlite_pragma(dbapi_connection, connection_record):
                cursor = dbapi_connection.cursor()
                cursor.execute("PRAGMA journal_mode=WAL")
                if db_config.get('enable_foreign_keys', True):
                    cursor.execute("PRAGMA foreign_keys=ON")
                cursor.close()

        return engine

    def get_session(self) -> Generator[Session, None, None]:
        session = self.SessionLocal()
        try:
            yield session
        finally:
            session.close()

    def archive_run(self, report: Dict[str, Any], output_dir: Optional[str] = None) -> int:
        """Store a report document; returns the new run id."""
        iteration = report.get("iteration") or {}
        trace = iteration.get("trace", [])
        measure = report.get("measure") or {}
        halt = iteration.get("halt")
        required = set(report.get("required_conditions", []))

        with next(self.get_session()) as session:
            run = RunRecord(
                mode=report["mode"],
                stages=",".join(report.get("stages", [])),
                exit_code=report["exit_code"],
                stop_reason=iteration.get("stop_reason"),
                halt_kind=halt["kind"] if halt else None,
                steps_completed=len(trace),
                final_error=trace[-1]["new_error"] if trace else None,
                beta=measure.get("beta"),
                beta_stderr=measure.get("stderr"),
                output_dir=output_dir,
                config_json=json.dumps(report.get("config", {})),
                verdicts_json=json.dumps(report.get("verdicts", {})),
                tool_version=report.get("tool", {}).get("version"),
            )
            run.steps = [
                StepRecord(nu=row["nu"], error=row["error"], new_error=row["new_error"], target=row["target"],
                           deviation=row["deviation"], contraction_ratio=row["contraction_ratio"])
                for row in trace
            ]
            run.conditions = [
                ConditionRecord(condition_id=cid, required=cid in required, passed=entry["pass"],
                                margin=entry["margin"], threshold=entry["threshold"])
                for cid, entry in (report.get("conditions") or {}).items()
            ]
            session.add(run)
            session.commit()
            session.refresh(run)
            logger.info("run_archived", run_id=run.id, mode=run.mode, exit_code=run.exit_code)
            return run.id

    def list_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        """Most recent runs first."""
        with next(self.get_session()) as session:
            runs = session.scalars(select(RunRecord).order_by(RunRecord.id.desc()).limit(limit)).all()
            return [
                {
                    "id": run.id,
                    "mode": run.mode,
                    "exit_code": run.exit_code,
                    "steps": run.steps_completed,
                    "beta": run.beta,
                    "output_dir": run.output_dir,
                    "created_at": run.created_at.strftime("%Y-%m-%d %H:%M") if run.created_at else "-",
                }
                for run in runs
            ]

    def run_config(self, run_id: int) -> Dict[str, Any]:
        """Config echo of an archived run, enough to re-run it."""
        with next(self.get_session()) as session:
            run = session.get(RunRecord, run_id)
            if run is None:
                raise KeyError(f"no archived run with id {run_id}")
            return json.loads(run.config_json)

    def get_database_info(self) -> dict:
        with next(self.get_session()) as session:
            tables_info = {
                "runs": session.scalar(select(func.count()).select_from(RunRecord)),
                "run_steps": session.scalar(select(func.count()).select_from(StepRecord)),
                "run_conditions": session.scalar(select(func.count()).select_from(ConditionRecord)),
            }
        return {
            "database_path": self.config['database']['path'],
            "tables": tables_info,
        }

    def backup_database(self, backup_path: Optional[str] = None) -> str:
        if backup_path is None:
            backup_dir = Path(self.config['database'].get('backup_path', './data/backups/'))
            backup_dir.mkdir(parents=True, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            backup_path = backup_dir / f"kam_runs_backup_{timestamp}.db"
        shutil.copy2(Path(self.config['database']['path']), backup_path)
        return str(backup_path)
