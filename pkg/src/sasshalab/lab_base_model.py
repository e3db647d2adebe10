# src/sasshalab/lab_base_model.py
"""
lab_base_model
==============

- **Module:** `src/sasshalab/lab_base_model.py`

Shared base models and the logging interface used across sasshalab.

Overview
--------
- **NumericModel**:
  Pydantic base class for models that carry numpy arrays (states, reports,
  ensembles). Allows arbitrary types so `numpy.ndarray` fields validate.

- **LogNotifier**:
  Abstract sink for log messages. Components that log accept an optional
  notifier and call `add_log` through their own `notify_log` helper, which
  prefixes the component name.

- **LoggingNotifier**:
  Forwards every message to the stdlib `logging` logger ``"sasshalab"``.

- **MemoryNotifier**:
  Keeps messages in memory; used by tests and for echoing a run summary.

Example
-------
```python
notifier = MemoryNotifier()
runner = ExperimentRunner(cfg, log_notifier=notifier)
runner.run()
print("\\n".join(notifier.lines))
```
"""

from abc import ABC, abstractmethod
import logging

from pydantic import BaseModel, ConfigDict, Field

LOGGER_NAME = "sasshalab"


class NumericModel(BaseModel):
    """
    Pydantic base for models holding numpy arrays.

    Assignment is not re-validated so optimizer states can be updated in
    place on the hot path.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)


class LogNotifier(ABC):
    """
    Abstract base class for logging notifications.

    Provides an interface for components that need to record or clear log
    messages. Implementations may direct logs to the `logging` module, to
    memory, or to any other sink.
    """

    @abstractmethod
    def add_log(self, text: str) -> None:
        """
        Add a log entry.

        Parameters
        ----------
        text : str
            The log message to record.
        """
        pass

    @abstractmethod
    def clear_log(self) -> None:
        """
        Clear all log entries.
        """
        pass


class LoggingNotifier(LogNotifier):
    """
    Notifier that forwards messages to the ``sasshalab`` stdlib logger.

    Parameters
    ----------
    level : int, default logging.INFO
        Level every message is emitted at.
    logger : logging.Logger, optional
        Logger to use instead of ``logging.getLogger("sasshalab")``.
    """

    def __init__(self, level: int = logging.INFO, logger: logging.Logger = None):
        self.level = level
        self.logger = logger or logging.getLogger(LOGGER_NAME)

    def add_log(self, text: str) -> None:
        self.logger.log(self.level, text)

    def clear_log(self) -> None:
        pass


class MemoryNotifier(BaseModel, LogNotifier):
    """
    Notifier that keeps every message in `lines`.
    """
    lines: list[str] = Field(default_factory=list)

    def add_log(self, text: str) -> None:
        self.lines.append(text)

    def clear_log(self) -> None:
        self.lines.clear()


class NotifierMixin:
    """
    Adds `notify_log` to components that own an optional `log_notifier`.

    Messages are prefixed with ``"<component_name> | "``.
    """
    log_notifier: LogNotifier = None

    @property
    def component_name(self) -> str:
        return type(self).__name__

    def notify_log(self, message: str) -> None:
        """
        Send a log message to the configured notifier, if any.

        Parameters
        ----------
        message : str
            The message to log.
        """
        if getattr(self, "log_notifier", None) is not None:
            self.log_notifier.add_log(f"{self.component_name} | {message}")
