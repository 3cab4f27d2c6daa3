import logging
import sys
from typing import List, Optional

from pythonjsonlogger import jsonlogger

from homsolve.core.config import settings

_installed: List[logging.Handler] = []


def setup_logging(level: Optional[str] = None, json_logs: Optional[bool] = None) -> logging.Logger:
    """Install stderr (and optional file) handlers on the root logger, replacing earlier ones.

    stdout stays free for command output.
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    use_json = settings.LOG_JSON if json_logs is None else json_logs

    if use_json:
        formatter: logging.Formatter = jsonlogger.JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s")
    else:
        formatter = logging.Formatter(settings.LOG_FORMAT)

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.LOG_FILE:
        try:
            settings.LOG_FILE.parent.mkdir(parents=True, exist_ok=True)
            handlers.append(logging.FileHandler(settings.LOG_FILE, encoding="utf-8"))
        except (PermissionError, OSError) as e:
            print(f"Warning: Cannot write to log file. Using console only. Error: {e}", file=sys.stderr)

    for handler in handlers:
        handler.setFormatter(formatter)

    reset_logging()
    root = logging.getLogger()
    _installed[:] = handlers
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))

    return logging.getLogger("homsolve")


def reset_logging() -> None:
    root = logging.getLogger()
    for handler in _installed:
        root.removeHandler(handler)
        handler.close()
    _installed.clear()
