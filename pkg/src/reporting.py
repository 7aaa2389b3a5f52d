"""JSON and CSV emission with atomic file replacement."""

from __future__ import annotations

import io
import json
import logging
import math
import os
import tempfile
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd


TOOL_NAME = "mapsel"
TOOL_VERSION = "0.1.0"


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return None
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    return value


def to_json_text(payload: Mapping[str, Any]) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def with_meta(payload: Dict[str, Any], command: str, include_meta: bool = True) -> Dict[str, Any]:
    out = dict(payload)
    if include_meta:
        out["meta"] = {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "command": command,
            "created": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        }
    return out


def _write_atomic(path: str, text: str, prefix: str) -> None:
    target_dir = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(target_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=prefix, suffix=".tmp", dir=target_dir)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            try:
                os.remove(tmp_path)
            except Exception:
                pass


def write_json(path: str, payload: Mapping[str, Any]) -> None:
    _write_atomic(path, to_json_text(payload), prefix=".mapsel_json_")
    logging.info("[REPORT] wrote %s", path)


def rows_to_csv_text(rows: Iterable[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    frame = pd.DataFrame([_plain(dict(r)) for r in rows], columns=list(columns) if columns else None)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_csv(path: str, rows: Iterable[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> None:
    _write_atomic(path, rows_to_csv_text(rows, columns), prefix=".mapsel_csv_")
    logging.info("[REPORT] wrote %s", path)


def read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def csv_path_for(json_path: str) -> str:
    root, _ = os.path.splitext(json_path)
    return root + ".csv"

