"""
Run state tracking models
Tracks the execution state of the experiments in one harness run
"""
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.utils.helpers import extract_error_info


class RunStatus(str, Enum):
    """Experiment execution status"""
    PENDING = "pending"          # Not yet started
    RUNNING = "running"          # Currently running
    COMPLETED = "completed"      # Finished, every row passed
    FAILED = "failed"            # Finished with failing rows
    ERROR = "error"              # Raised before producing rows
    REJECTED = "rejected"        # Hypotheses violated at validation

    def is_terminal(self) -> bool:
        """Check if this is a terminal state"""
        return self in [RunStatus.COMPLETED, RunStatus.FAILED, RunStatus.ERROR, RunStatus.REJECTED]

    def __str__(self):
        return self.value


class ExperimentState(BaseModel):
    """
    State of one experiment inside a run
    """
    label: str = Field(..., description="Experiment label")
    experiment: str = Field(..., description="Experiment id")
    status: RunStatus = Field(default=RunStatus.PENDING)

    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    rows: int = Field(default=0, ge=0)
    passed_rows: int = Field(default=0, ge=0)

    error_message: Optional[str] = Field(None, max_length=5000)
    error_type: Optional[str] = None
    error_details: Dict[str, Any] = Field(default_factory=dict)

    def start(self):
        self.status = RunStatus.RUNNING
        self.started_at = datetime.now(timezone.utc)

    def finish(self, rows: int, passed_rows: int):
        self.rows = rows
        self.passed_rows = passed_rows
        self.completed_at = datetime.now(timezone.utc)
        self.status = RunStatus.COMPLETED if rows == passed_rows else RunStatus.FAILED

    def set_error(self, error: Exception, rejected: bool = False):
        """Set error information from exception"""
        info = extract_error_info(error)
        self.error_message = info["error_message"][:5000]
        self.error_type = info["error_type"]
        self.error_details = {
            "error_module": info["error_module"],
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        self.completed_at = datetime.now(timezone.utc)
        self.status = RunStatus.REJECTED if rejected else RunStatus.ERROR

    def get_duration(self) -> Optional[float]:
        """Get processing duration in seconds"""
        if self.started_at and self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None


class RunState(BaseModel):
    """
    Complete state of a harness run
    """
    run_id: str = Field(..., description="Unique run ID")
    config_path: Optional[str] = None
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    completed_at: Optional[datetime] = None
    experiments: List[ExperimentState] = Field(default_factory=list)
    report_path: Optional[str] = None
    healthy: Optional[bool] = None

    def add(self, label: str, experiment: str) -> ExperimentState:
        state = ExperimentState(label=label, experiment=experiment)
        self.experiments.append(state)
        return state

    @property
    def total_rows(self) -> int:
        return sum(e.rows for e in self.experiments)

    @property
    def passed_rows(self) -> int:
        return sum(e.passed_rows for e in self.experiments)

    @property
    def all_passed(self) -> bool:
        return bool(self.experiments) and all(e.status == RunStatus.COMPLETED for e in self.experiments)

    def count(self, status: RunStatus) -> int:
        return sum(1 for e in self.experiments if e.status == status)

    def get_duration(self) -> Optional[float]:
        if self.completed_at:
            return (self.completed_at - self.created_at).total_seconds()
        return None

    def to_summary_dict(self) -> Dict[str, Any]:
        """Get summary dictionary for logging/reporting"""
        return {
            "run_id": self.run_id,
            "experiments": len(self.experiments),
            "completed": self.count(RunStatus.COMPLETED),
            "failed": self.count(RunStatus.FAILED),
            "errors": self.count(RunStatus.ERROR),
            "rejected": self.count(RunStatus.REJECTED),
            "rows": f"{self.passed_rows}/{self.total_rows} passed",
            "duration_seconds": self.get_duration(),
            "report_path": self.report_path,
        }
