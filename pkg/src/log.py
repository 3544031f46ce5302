import logging
import sys

_FORMAT = "[%(name)s] %(message)s"
_configured = False


def get_logger(tag: str) -> logging.Logger:
    """Component logger; the tag shows up as the [Tag] prefix"""
    return logging.getLogger(f"bilistab.{tag}")


class _TagFormatter(logging.Formatter):
    def format(self, record):
        # strip the package prefix so lines read "[Oracle] ..."
        record.name = record.name.rsplit(".", 1)[-1]
        return super().format(record)


class _ConsoleHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is at emit time"""

    def emit(self, record):
        self.stream = sys.stderr
        super().emit(record)


def setup_logging(level: int = logging.INFO, stream=None) -> None:
    """Attach a single console handler to the package root logger"""
    global _configured
    root = logging.getLogger("bilistab")
    root.setLevel(level)
    if _configured:
        for handler in root.handlers:
            handler.setLevel(level)
        return
    handler = logging.StreamHandler(stream) if stream is not None else _ConsoleHandler()
    handler.setFormatter(_TagFormatter(_FORMAT))
    handler.setLevel(level)
    root.addHandler(handler)
    root.propagate = False
    _configured = True
