"""
SQLAlchemy models for the run archive.
"""

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.sql import func

Base = declarative_base()


class RunRecord(Base):
    """One archived run with its headline results."""
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True, autoincrement=True)
    mode = Column(String(50), nullable=False)  # 'full', 'frequency_preserving:<n1>', 'isoenergetic:<n1>'
    stages = Column(String(100), nullable=False)
    exit_code = Column(Integer, nullable=False)
    stop_reason = Column(String(50))
    halt_kind = Column(String(50))
    steps_completed = Column(Integer, default=0)
    final_error = Column(Float)
    beta = Column(Float)
    beta_stderr = Column(Float)
    output_dir = Column(String(500))
    config_json = Column(Text, nullable=False)
    verdicts_json = Column(Text)
    tool_version = Column(String(20))
    created_at = Column(DateTime, default=func.now())

    steps = relationship("StepRecord", back_populates="run", cascade="all, delete-orphan")
    conditions = relationship("ConditionRecord", back_populates="run", cascade="all, delete-orphan")

    __table_args__ = (
        Index('idx_runs_mode', 'mode'),
        Index('idx_runs_exit_code', 'exit_code'),
    )


class StepRecord(Base):
    """Per-step iteration trace of a run."""
    __tablename__ = 'run_steps'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)
    nu = Column(Integer, nullable=False)
    error = Column(Float)
    new_error = Column(Float)
    target = Column(Float)
    deviation = Column(Float)
    contraction_ratio = Column(Float)

    run = relationship("RunRecord", back_populates="steps")

    __table_args__ = (
        Index('idx_run_steps_run', 'run_id', 'nu'),
    )


class ConditionRecord(Base):
    """Outcome of one non-degeneracy check in a run."""
    __tablename__ = 'run_conditions'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)
    condition_id = Column(String(10), nullable=False)  # 'R', 'K', 'I', primed for grid checks
    required = Column(Boolean, default=False)
    passed = Column(Boolean, nullable=False)
    margin = Column(Float)
    threshold = Column(Float)

    run = relationship("RunRecord", back_populates="conditions")
