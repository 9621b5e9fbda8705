import json
import math
from pathlib import Path
from typing import Any, Dict

from pydantic import BaseModel

from nlconsensus.core.logger import format_run_log, logger
from nlconsensus.models.state import Trajectory


def _clean(value: Any) -> Any:
    # JSON has no NaN/inf
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_clean(v) for v in value)
    return value


def flat_record(model: BaseModel) -> Dict[str, Any]:
    return {k: _clean(v) for k, v in model.model_dump().items()}


class ExportService:
    """Writes run artifacts. Output bytes depend only on the values written."""

    def write_trajectory_csv(self, traj: Trajectory, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        traj.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Trajectory written to {path} ({len(traj)} samples)")
        return path

    def write_json(self, model: BaseModel, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(flat_record(model), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return path

    def format_key_values(self, model: BaseModel) -> str:
        lines = []
        for key, value in sorted(flat_record(model).items()):
            if value is None:
                text = "none"
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def write_key_values(self, model: BaseModel, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.format_key_values(model), encoding="utf-8")
        return path

    def write_run_log(self, entries: list, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_run_log(entries), encoding="utf-8")
        return path


export_service = ExportService()
