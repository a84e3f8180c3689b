"""Intermediate store shared by the pipeline stages.

Layout on disk, safe to inspect manually:

    store/<company_id>/<stage>.blob   JSON payload of a completed stage
    store/<company_id>/status         JSON map of stage -> state

A done stage's blob is immutable: re-running skips it unless forced. All
writes go through a temp file and an atomic rename, so a killed run never
leaves a half-written blob behind a "done" status.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Optional


class Stage(str, Enum):
    QUERIES = "queries"
    SEARCH = "search"
    FETCH = "fetch"
    EXTRACT = "extract"
    SCORE = "score"
    RECOGNIZE = "recognize"
    VALIDATE = "validate"
    UPSERT = "upsert"


PIPELINE_STAGES = list(Stage)


class StageState(str, Enum):
    PENDING = "pending"
    DONE = "done"
    FAILED = "failed"


class IntermediateStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _company_dir(self, company_id: str) -> Path:
        return self.root / company_id

    def _status_path(self, company_id: str) -> Path:
        return self._company_dir(company_id) / "status"

    def _blob_path(self, company_id: str, stage: Stage) -> Path:
        return self._company_dir(company_id) / f"{stage.value}.blob"

    def statuses(self, company_id: str) -> dict[str, str]:
        path = self._status_path(company_id)
        if not path.exists():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    def state(self, company_id: str, stage: Stage) -> StageState:
        return StageState(self.statuses(company_id).get(stage.value, "pending"))

    def is_done(self, company_id: str, stage: Stage) -> bool:
        return self.state(company_id, stage) is StageState.DONE

    def _write_status(self, company_id: str, statuses: dict[str, str]) -> None:
        path = self._status_path(company_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(statuses, sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def write(self, company_id: str, stage: Stage, payload: Any) -> None:
        """Persist a stage result and mark the stage done, atomically."""
        directory = self._company_dir(company_id)
        directory.mkdir(parents=True, exist_ok=True)
        blob = self._blob_path(company_id, stage)
        tmp = blob.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        tmp.replace(blob)
        statuses = self.statuses(company_id)
        statuses[stage.value] = StageState.DONE.value
        self._write_status(company_id, statuses)

    def read(self, company_id: str, stage: Stage) -> Any:
        return json.loads(self._blob_path(company_id, stage).read_text(encoding="utf-8"))

    def read_if_done(self, company_id: str, stage: Stage) -> Optional[Any]:
        if self.is_done(company_id, stage):
            return self.read(company_id, stage)
        return None

    def mark_failed(self, company_id: str, stage: Stage, reason: str) -> None:
        directory = self._company_dir(company_id)
        directory.mkdir(parents=True, exist_ok=True)
        statuses = self.statuses(company_id)
        statuses[stage.value] = StageState.FAILED.value
        statuses[f"{stage.value}.error"] = reason
        self._write_status(company_id, statuses)

    def clear(self, company_id: str) -> None:
        """Drop all stage results for one company (forced re-run)."""
        directory = self._company_dir(company_id)
        if not directory.exists():
            return
        for path in directory.iterdir():
            path.unlink()
