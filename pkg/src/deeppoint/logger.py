"""JSONL event logging."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .errors import IoError


@dataclass
class EpochSnapshot:
    timestamp: str
    epoch: int
    steps: int
    lr: float
    loss_d: float
    loss_g_adv: float
    cd: float
    emd: float
    eval_cd_cm: float | None = None
    eval_emd_cm: float | None = None
    eval_fscore: float | None = None


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_run_id(prefix: str = "run") -> str:
    return datetime.now(timezone.utc).strftime(f"{prefix}_%Y%m%d_%H%M%S_%f")


class EventLogger:
    """Append-only JSONL logger with per-run directories."""

    def __init__(
        self,
        *,
        logs_dir: str | Path,
        run_id: str,
        event_file_name: str = "events.jsonl",
        summary_file_name: str = "summary.jsonl",
        append: bool = False,
    ) -> None:
        self.logs_dir = Path(logs_dir)
        self.run_id = run_id
        self.run_dir = self.logs_dir / run_id
        self.output_path = self.run_dir / event_file_name
        self.summary_path = self.run_dir / summary_file_name
        self.sequence = 0

        try:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            if append and self.output_path.exists():
                self.sequence = sum(1 for _ in self.output_path.open("r", encoding="utf-8"))
            else:
                self.output_path.write_text("", encoding="utf-8")
                self.summary_path.write_text("", encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot create log directory {self.run_dir}: {exc}") from exc

        latest = self.logs_dir / "latest"
        try:
            if latest.exists() or latest.is_symlink():
                latest.unlink()
            latest.symlink_to(self.run_id)
        except OSError:
            # symlinks are a convenience; some filesystems refuse them
            pass

    def log(self, event_type: str, data: dict[str, Any]) -> None:
        self.sequence += 1
        payload = {
            "timestamp": utc_now(),
            "sequence": self.sequence,
            "event_type": event_type,
            **data,
        }
        with self.output_path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(payload, ensure_ascii=True) + "\n")

    def log_summary(self, summary: EpochSnapshot) -> None:
        with self.summary_path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(asdict(summary), ensure_ascii=True) + "\n")

    def read_recent(self, n: int = 50) -> list[dict[str, Any]]:
        if n <= 0 or not self.output_path.exists():
            return []
        lines = self.output_path.read_text(encoding="utf-8").splitlines()
        result: list[dict[str, Any]] = []
        for raw in lines[-n:]:
            try:
                result.append(json.loads(raw))
            except json.JSONDecodeError:
                continue
        return result

    def read_events(self, event_type: str | None = None) -> list[dict[str, Any]]:
        if not self.output_path.exists():
            return []
        events = []
        for raw in self.output_path.read_text(encoding="utf-8").splitlines():
            try:
                event = json.loads(raw)
            except json.JSONDecodeError:
                continue
            if event_type is None or event.get("event_type") == event_type:
                events.append(event)
        return events
