"""
Report models shared by every experiment.

Numeric fields are plain Python values so that serialized reports are
byte-identical across reruns of the same configuration.
"""

import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .. import __version__
from ..core.errors import PreconditionError, ResourceCapError, TensorMPError

ErrorKind = Literal["precondition", "resource_cap", "other"]


def artifact_version() -> str:
    return f"tensor-mp {__version__}"


class CaseError(BaseModel):
    """A per-case failure recorded while the run continues."""

    case: str
    error: str
    kind: ErrorKind

    @classmethod
    def from_exception(cls, case: str, exc: TensorMPError) -> "CaseError":
        if isinstance(exc, ResourceCapError):
            kind: ErrorKind = "resource_cap"
        elif isinstance(exc, PreconditionError):
            kind = "precondition"
        else:
            kind = "other"
        return cls(case=case, error=str(exc), kind=kind)


class ExperimentReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: str
    version: str = Field(default_factory=artifact_version)
    seed: int
    config: Dict[str, Any]
    warnings: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    errors: List[CaseError] = Field(default_factory=list)
    wall_time_s: Optional[float] = None

    def to_json(self) -> str:
        exclude = {"wall_time_s"} if self.wall_time_s is None else None
        return self.model_dump_json(indent=2, exclude=exclude)


def plain(value: Any) -> Any:
    """
    Convert numpy scalars and arrays (also nested in dicts and lists) to
    JSON-ready Python values; non-finite floats become strings.
    """
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return value
