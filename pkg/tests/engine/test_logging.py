import logging

from ncycle_entropic.engine.logging import (
    LOGGER_NAME,
    RichMarkupFormatter,
    RunContext,
    RunContextFilter,
    configure_logging,
    run_context,
)
from ncycle_entropic.simulation.experiments import oracle_agreement


class _Collect(logging.Handler):
    def __init__(self) -> None:
        super().__init__()
        self.records: list[logging.LogRecord] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.records.append(record)


def test_filter_and_formatter_stamp_command_and_trial():
    context = RunContext(command="activate", trial=3)
    record = logging.LogRecord(LOGGER_NAME, logging.INFO, __file__, 1, "BC^%d violated", (4,), None)
    assert RunContextFilter(context).filter(record)
    assert RichMarkupFormatter().format(record) == "[grey50]activate:3.0[/grey50]  BC^4 violated"
    assert context.log_count == 1


def test_formatter_without_context_uses_placeholders():
    record = logging.LogRecord(LOGGER_NAME, logging.WARNING, __file__, 1, "plain", (), None)
    assert RichMarkupFormatter().format(record) == "[grey50]-:-.0[/grey50]  plain"


def test_start_trial_resets_log_count():
    context = RunContext(command="appendix", log_count=5)
    context.start_trial(7)
    assert (context.trial, context.log_count) == (7, 0)
    context.inc_log_count()
    context.end_trial()
    assert (context.trial, context.log_count) == (None, 0)


def test_configure_logging_replaces_handlers():
    configure_logging()
    context = configure_logging(logging.INFO, RunContext(command="sweep"))
    logger = logging.getLogger(LOGGER_NAME)
    assert len(logger.handlers) == 1
    assert logger.level == logging.INFO
    assert not logger.propagate
    assert context.command == "sweep"
    assert run_context() is context
    configure_logging()


def test_trial_loops_stamp_trial_index():
    """
    Scenario: Compare the two oracles on a handful of triangles with debug logging on.
    Verify: Records carry the index of the trial that emitted them; the context is cleared afterwards.
    """
    context = configure_logging(logging.DEBUG, RunContext(command="agree"))
    collector = _Collect()
    logger = logging.getLogger(LOGGER_NAME)
    logger.addHandler(collector)
    try:
        oracle_agreement(3, 8, seed=1)
    finally:
        logger.removeHandler(collector)
        configure_logging()
    trials = [getattr(r, "trial", None) for r in collector.records]
    assert trials
    assert all(isinstance(t, int) and 0 <= t < 8 for t in trials)
    assert context.trial is None
