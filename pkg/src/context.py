import os
import sys
import logging
from dotenv import load_dotenv, find_dotenv


def _runtime_base_dir() -> str:
    if getattr(sys, "frozen", False):
        exe_dir = os.path.dirname(os.path.abspath(sys.executable))
        candidates = [
            os.path.join(exe_dir, "src"),
            os.path.join(os.path.dirname(exe_dir), "src"),
            os.path.join(os.getcwd(), "src"),
            exe_dir,
        ]
        for candidate in candidates:
            try:
                if os.path.isdir(candidate):
                    return os.path.abspath(candidate)
            except Exception:
                continue
        return os.path.abspath(exe_dir)
    return os.path.dirname(os.path.abspath(__file__))


_RUNTIME_BASE = _runtime_base_dir()
_ENV_PATH = os.path.join(_RUNTIME_BASE, ".env")

# .env from the runtime base first, then the nearest one up the tree
load_dotenv(_ENV_PATH if os.path.isfile(_ENV_PATH) else find_dotenv(usecwd=True))

LOG_FORMAT = "[%(asctime)s] %(levelname)s: %(message)s"


def _level(value: str) -> int:
    name = str(value or "").strip().upper()
    level = logging.getLevelName(name) if name else logging.INFO
    return level if isinstance(level, int) else logging.INFO


LOG_LEVEL = _level(os.getenv("MAPSEL_LOG_LEVEL", "INFO"))
LOG_FILE = str(os.getenv("MAPSEL_LOG_FILE", "") or "").strip()
RUN_LOG_DB = str(os.getenv("MAPSEL_RUN_LOG_DB", "") or "").strip()


def configure_logging(level: int = LOG_LEVEL, log_file: str = LOG_FILE) -> None:
    # stdout carries command payloads, so log lines go to stderr
    handlers: list = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
