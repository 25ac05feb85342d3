import json
import logging
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

OBSERVABILITY_LOGGER_NAME = "cli.observability"
_TEXT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=True)


_configured_key: tuple[str, bool, str | None] | None = None


def configure_logging(level: str = "WARNING", json_lines: bool = False, log_file: str | Path | None = None) -> None:
    """Install stderr (text or JSON lines) and optional JSON-lines file handlers on the root logger.

    Calling again with the same arguments is a no-op.
    """
    global _configured_key
    key = (level.upper(), json_lines, str(log_file) if log_file else None)
    if _configured_key == key:
        return

    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level}")

    root = logging.getLogger()
    root.setLevel(numeric_level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(numeric_level)
    stream_handler.setFormatter(JsonLineFormatter() if json_lines else logging.Formatter(_TEXT_LOG_FORMAT))
    root.addHandler(stream_handler)

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(path, encoding="utf-8")
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(JsonLineFormatter())
        root.addHandler(file_handler)

    _configured_key = key
    logging.getLogger(OBSERVABILITY_LOGGER_NAME).debug(
        "Configured logging: level=%s json=%s file=%s", level.upper(), json_lines, log_file
    )
