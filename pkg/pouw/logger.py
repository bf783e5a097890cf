"""Run history and console helpers.

Every CLI command is stored as a JSON-lines entry in ``<out>/history.jsonl``.
Each entry records the timestamp, command, arguments, seed, exit status and a
short result summary.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

CYAN = "\033[1;36m"
GREEN = "\033[1;32m"
RED = "\033[1;31m"
DIM = "\033[2m"
BOLD = "\033[1m"
RESET = "\033[0m"

HISTORY_FILE = "history.jsonl"


def history_path(out_dir: Path) -> Path:
    return Path(out_dir) / HISTORY_FILE


def log_command(
    out_dir: Path,
    command: str,
    argv: list[str] | None = None,
    seed: int | None = None,
    status: int | None = None,
    result: str = "",
) -> None:
    """Append a command entry to the history log (best-effort)."""
    try:
        path = history_path(out_dir)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": command,
            "argv": list(argv or []),
            "seed": seed,
            "status": status,
            "result": result,
        }
        with open(path, "a") as f:
            f.write(json.dumps(entry) + "\n")
    except OSError:
        pass


def read_history(out_dir: Path, limit: int = 20) -> list[dict]:
    """Return the most recent *limit* entries; unreadable lines are skipped."""
    path = history_path(out_dir)
    if not path.exists():
        return []
    entries = []
    for line in path.read_text().splitlines():
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError:
            continue
    return entries[-limit:] if limit > 0 else []


STATUS_MARKS = {0: f"{GREEN}✓{RESET}", 1: f"{RED}✗{RESET}", 2: f"{RED}usage{RESET}"}


def print_history(out_dir: Path, limit: int = 20) -> None:
    entries = read_history(out_dir, limit)
    if not entries:
        print(f"  {DIM}No command history found in {history_path(out_dir)}{RESET}")
        return

    print(f"\n  {BOLD}Recent pouw runs{RESET} ({len(entries)} entries)\n")
    for i, entry in enumerate(entries, 1):
        mark = STATUS_MARKS.get(entry.get("status"), f"{DIM}?{RESET}")
        when = entry.get("timestamp", "?")[:19].replace("T", " ")
        print(f"  {DIM}{i:3d}.{RESET} {mark}  {entry.get('command', '?')} "
              f"{' '.join(entry.get('argv', []))}")
        if entry.get("result"):
            print(f"       {DIM}{entry['result']}{RESET}")
        print(f"       {DIM}{when}  seed={entry.get('seed')}{RESET}\n")


def info(message: str) -> None:
    print(f"{CYAN}[pouw]{RESET} {message}", file=sys.stderr)


def error(message: str) -> None:
    print(f"{RED}[pouw] error:{RESET} {message}", file=sys.stderr)
