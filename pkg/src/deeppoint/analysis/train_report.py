"""Summarize a DeepPoint training event log: loss curves per epoch, clip counts, final evaluation."""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter, defaultdict
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

_CURVE_KEYS = ("loss_d", "loss_g_adv", "cd", "emd", "wall_ms")


def summarize_events(path: Path) -> dict[str, Any]:
    event_types: Counter[str] = Counter()
    clips: Counter[str] = Counter()
    per_epoch: dict[int, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    lr_by_epoch: dict[int, float] = {}
    numerical_errors: list[dict[str, Any]] = []
    evaluations: list[dict[str, Any]] = []
    checkpoints: list[str] = []
    first_ts: str | None = None
    last_ts: str | None = None
    last_step = 0

    with path.open("r", encoding="utf-8") as handle:
        for raw in handle:
            raw = raw.strip()
            if not raw:
                continue
            try:
                event = json.loads(raw)
            except json.JSONDecodeError:
                continue
            event_type = str(event.get("event_type", "unknown"))
            event_types[event_type] += 1

            timestamp = event.get("timestamp")
            if isinstance(timestamp, str):
                if first_ts is None:
                    first_ts = timestamp
                last_ts = timestamp

            if event_type == "train_step":
                epoch = int(event.get("epoch", 0))
                for key in _CURVE_KEYS:
                    value = event.get(key)
                    if isinstance(value, (int, float)):
                        per_epoch[epoch][key].append(float(value))
                lr_by_epoch[epoch] = float(event.get("lr", 0.0))
                last_step = max(last_step, int(event.get("step", 0)))
            elif event_type == "grad_clipped":
                clips[str(event.get("network", "unknown"))] += 1
            elif event_type == "numerical_error":
                numerical_errors.append(
                    {"epoch": event.get("epoch"), "step": event.get("step"), "op_id": event.get("op_id"), "sample_ids": event.get("sample_ids")}
                )
            elif event_type == "evaluation":
                evaluations.append({k: v for k, v in event.items() if k not in {"timestamp", "sequence", "event_type"}})
            elif event_type == "checkpoint_written":
                path_value = event.get("path")
                if isinstance(path_value, str):
                    checkpoints.append(path_value)

    curves = []
    for epoch in sorted(per_epoch):
        row: dict[str, Any] = {"epoch": epoch, "lr": lr_by_epoch.get(epoch), "steps": len(per_epoch[epoch]["cd"])}
        for key in _CURVE_KEYS:
            values = per_epoch[epoch][key]
            row[key] = sum(values) / len(values) if values else None
        curves.append(row)

    cd_first = curves[0]["cd"] if curves else None
    cd_last = curves[-1]["cd"] if curves else None
    cd_reduction = None
    if cd_first and cd_last is not None:
        cd_reduction = 1.0 - cd_last / cd_first

    return {
        "events_path": str(path),
        "first_timestamp": first_ts,
        "last_timestamp": last_ts,
        "event_types": dict(event_types),
        "steps": last_step,
        "epochs": len(curves),
        "curves": curves,
        "train_cd_reduction": cd_reduction,
        "grad_clips": dict(clips),
        "numerical_errors": numerical_errors,
        "checkpoints": checkpoints,
        "final_evaluation": evaluations[-1] if evaluations else None,
    }


def _resolve_events_path(log_path: str, run_id: str | None) -> Path:
    if run_id:
        return Path(log_path) / run_id / "events.jsonl"
    path = Path(log_path)
    if path.is_dir():
        return path / "latest" / "events.jsonl"
    return path


def main() -> int:
    load_dotenv()
    parser = argparse.ArgumentParser(description="Summarize DeepPoint training event logs.")
    parser.add_argument(
        "--events",
        default=os.environ.get("DEEPPOINT_LOGS_DIR", "logs"),
        help="Path to events.jsonl, or a logs dir (uses --run-id or the latest run).",
    )
    parser.add_argument("--run-id", default=None, help="Run id under the logs dir (e.g., train_20260301_101500_000000).")
    parser.add_argument("--pretty", action="store_true", help="Pretty-print JSON output.")
    args = parser.parse_args()

    path = _resolve_events_path(args.events, args.run_id)
    if not path.exists():
        print(f"error [io_error]: events file not found: {path}", file=sys.stderr)
        return 3
    summary = summarize_events(path)
    print(json.dumps(summary, indent=2 if args.pretty else None, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
