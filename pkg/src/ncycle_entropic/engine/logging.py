from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, override

from rich.console import Console
from rich.highlighter import Highlighter
from rich.logging import RichHandler

if TYPE_CHECKING:
    from rich.text import Text

LOGGER_NAME = "ncycle_entropic"

COLOR = {
    "bc": "bold cyan",
    "c": "bold orange1",
    "local": "bold green",
    "nonlocal": "bold magenta",
    "violated": "bold red",
    "weight": "bold plum1",
    "prefix": "grey50",
}


@dataclass(slots=True)
class RunContext:
    """Mutable context stamped on every record: the running command, trial and log count within it."""

    command: str = "-"
    trial: int | None = None
    log_count: int = 0

    def start_trial(self, index: int) -> None:
        self.trial = index
        self.log_count = 0

    def end_trial(self) -> None:
        self.trial = None
        self.log_count = 0

    def inc_log_count(self) -> None:
        self.log_count += 1


class RunContextFilter(logging.Filter):
    """Inject the active command, trial index and log count into every log record."""

    def __init__(self, context: RunContext, name: str = "") -> None:
        super().__init__(name)
        self.context: RunContext = context

    @override
    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.context.command
        record.trial = "-" if self.context.trial is None else self.context.trial
        record.log_count = self.context.log_count
        self.context.inc_log_count()
        return True


def run_context() -> RunContext:
    """The context installed by `configure_logging`, or a detached one when logging is unconfigured."""
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        for flt in handler.filters:
            if isinstance(flt, RunContextFilter):
                return flt.context
    return RunContext()


class RichMarkupFormatter(logging.Formatter):
    @override
    def format(self, record: logging.LogRecord) -> str:
        command = getattr(record, "command", "-")
        trial = getattr(record, "trial", "-")
        log_count = getattr(record, "log_count", 0)
        prefix = f"{command}:{trial}.{log_count}"
        message = record.getMessage()
        return f"[{COLOR['prefix']}]{prefix}[/{COLOR['prefix']}]  {message}"


class InequalityHighlighter(Highlighter):
    @override
    def highlight(self, text: Text) -> None:
        text.highlight_regex(r"\bBC\^\d+", COLOR["bc"])
        text.highlight_regex(r"\bC\^\([+\-,]+\)", COLOR["c"])
        text.highlight_regex(r"\bnonlocal\b", COLOR["nonlocal"])
        text.highlight_regex(r"(?<!non)\blocal\b", COLOR["local"])
        text.highlight_regex(r"\bviolated\b", COLOR["violated"])
        text.highlight_regex(r"\bv\*?=\S+", COLOR["weight"])


def configure_logging(level: int = logging.WARNING, context: RunContext | None = None) -> RunContext:
    """Route the package logger through a single RichHandler and return its run context."""
    context = RunContext() if context is None else context
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    handler = RichHandler(
        console=Console(stderr=True),
        markup=True,
        show_path=False,
        show_time=False,
        highlighter=InequalityHighlighter(),
    )
    handler.setFormatter(RichMarkupFormatter())
    handler.addFilter(RunContextFilter(context))
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.propagate = False
    return context
