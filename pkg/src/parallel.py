from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, List, Optional, TypeVar

import psutil


T = TypeVar("T")
R = TypeVar("R")


def _env_int(name: str, default: int) -> int:
    try:
        raw = str(os.getenv(name, "") or "").strip()
        return int(raw) if raw else default
    except Exception:
        return default


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count, bounded by the physical cores psutil reports."""
    wanted = requested if requested is not None else _env_int("MAPSEL_WORKERS", 1)
    try:
        cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    except Exception:
        cores = 1
    return max(1, min(int(wanted), int(cores)))


def chunked(items: Iterable[T], size: int) -> Iterator[List[T]]:
    stream = iter(items)
    while True:
        chunk = list(itertools.islice(stream, size))
        if not chunk:
            return
        yield chunk


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Applies fn to every item; results come back in input order."""
    batch = list(items)
    count = resolve_workers(workers)
    if count <= 1 or len(batch) <= 1:
        return [fn(item) for item in batch]
    logging.debug("[PARALLEL] %d items on %d workers", len(batch), count)
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, batch))
