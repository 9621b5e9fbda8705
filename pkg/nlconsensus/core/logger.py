import contextlib
import contextvars
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Iterator

from nlconsensus.core.config import settings

# ─── Per-run log capture via contextvars ──────────────────────────────────────
# Worker threads started from a copied context get their own buffer binding,
# so concurrent runs don't mix entries.
_run_log_buffer: contextvars.ContextVar[list | None] = contextvars.ContextVar(
    "_run_log_buffer", default=None
)


class RunLogHandler(logging.Handler):
    """Captures log records into the buffer of the run that emitted them."""

    # Map engine filenames to stage labels
    _STAGE_LABELS = {
        "graph.py": "GRAPH",
        "protocol.py": "PROTOCOL",
        "dynamics.py": "DYNAMICS",
        "analysis.py": "ANALYSIS",
        "oracle.py": "ORACLE",
        "graph_io.py": "IO",
        "experiment_config.py": "IO",
        "export.py": "IO",
        "plotting.py": "IO",
        "runner.py": "RUNNER",
        "cli.py": "CLI",
    }

    def emit(self, record: logging.LogRecord):
        buf = _run_log_buffer.get(None)
        if buf is None:
            return
        buf.append(
            {
                "level": record.levelname,
                "stage": self._STAGE_LABELS.get(record.filename, record.filename),
                "msg": record.getMessage(),
            }
        )


@contextlib.contextmanager
def capture_run_log() -> Iterator[list]:
    """Collect every record logged inside the block into a fresh list."""
    buf: list = []
    token = _run_log_buffer.set(buf)
    try:
        yield buf
    finally:
        _run_log_buffer.reset(token)


def format_run_log(entries: list) -> str:
    return "".join(f"{e['level']:<8} [{e['stage']}] {e['msg']}\n" for e in entries)


def setup_logging():
    """
    Central logging configuration for nlconsensus.
    Outputs to the console and, unless disabled, to a rotating log file.
    """
    logger = logging.getLogger("nlconsensus")
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

    # Prevent duplicate logs if already configured
    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
    )

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        os.makedirs(settings.LOG_DIR, exist_ok=True)
        file_handler = RotatingFileHandler(
            os.path.join(settings.LOG_DIR, "nlconsensus.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # Structured capture, no formatter needed
    logger.addHandler(RunLogHandler())

    return logger


# Initialize on import
logger = setup_logging()
