# Run archive module
from .database import ArchiveManager, default_config_path
from .models import Base, ConditionRecord, RunRecord, StepRecord
