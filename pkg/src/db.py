import os
import sqlite3
from datetime import datetime, timedelta
from typing import Optional

_DB = None


def init_db(path: Optional[str] = None) -> bool:
    """Opens the run ledger; without a path (or MAPSEL_RUN_LOG_DB) logging stays off."""
    global _DB
    target = str(path or os.getenv("MAPSEL_RUN_LOG_DB", "") or "").strip()
    if not target:
        _DB = None
        return False
    _DB = sqlite3.connect(target)
    c = _DB.cursor()
    c.execute(
        """
        CREATE TABLE IF NOT EXISTS runs (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            timestamp TEXT,
            command TEXT,
            status TEXT,
            exit_code INTEGER,
            details TEXT
        )
        """
    )
    _DB.commit()
    return True


def close_db() -> None:
    global _DB
    if _DB is not None:
        _DB.close()
    _DB = None


def write_action_log(command: str, status: str, exit_code: int, details: str = "") -> None:
    if _DB is None:
        return
    ts = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    c = _DB.cursor()
    c.execute(
        "INSERT INTO runs (timestamp, command, status, exit_code, details) VALUES (?, ?, ?, ?, ?)",
        (ts, command, status, int(exit_code), details),
    )
    _DB.commit()


def recent_runs(limit: int = 20):
    if _DB is None:
        return []
    c = _DB.cursor()
    c.execute(
        "SELECT timestamp, command, status, exit_code, details FROM runs ORDER BY id DESC LIMIT ?",
        (int(limit),),
    )
    return c.fetchall()


def cleanup_old_logs(days: int) -> None:
    if _DB is None:
        return
    cutoff = (datetime.now() - timedelta(days=days)).strftime("%Y-%m-%d %H:%M:%S")
    c = _DB.cursor()
    c.execute("DELETE FROM runs WHERE timestamp < ?", (cutoff,))
    _DB.commit()
