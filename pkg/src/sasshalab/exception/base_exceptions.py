# src/sasshalab/exception/base_exceptions.py
"""
base_exceptions
===============

- **Module:** `src/sasshalab/exception/base_exceptions.py`

Custom exception types for sasshalab.

Every error raised by the laboratory derives from `SasshaLabError`. The
subclasses carry the context a caller needs to report the failure: the
offending configuration key and line, the CSV line, or the optimizer step
and quantity that became non-finite.

Overview
--------
- **SasshaLabError**:
  Root of the hierarchy. Stores a human-readable `message`.

- **ConfigError**:
  Raised by the configuration parser and by model validation. Carries the
  dotted `key` and 1-based `line` when known.

- **DatasetParseError**:
  Raised while ingesting a CSV dataset. Carries the 1-based `line`.

- **DimensionMismatchError**, **PreconditionError**, **AsymmetricMatrixError**:
  Contract violations of numerical operations.

- **DivergenceError**:
  Raised by an optimizer step when parameters, loss or preconditioner
  entries become non-finite. Carries `step` and `quantity`.

- **UsageError**:
  Command-line usage problems.

Usage
-----
```python
from sasshalab.exception.base_exceptions import ConfigError

raise ConfigError("optimizer.k must be >= 1", key="optimizer.k", line=4)
```
"""


class SasshaLabError(Exception):
    """
    Base exception for sasshalab errors.

    Attributes
    ----------
    message : str
        Human-readable description of the error.
    """

    def __init__(self, message=""):
        self.message = message
        super().__init__(self.message)


class ConfigError(SasshaLabError):
    """
    Exception for configuration parsing and validation errors.

    Attributes
    ----------
    message : str
        Description of the problem.
    key : str, optional
        Dotted configuration key involved, e.g. ``optimizer.rho``.
    line : int, optional
        1-based line number in the configuration file.

    Example
    -------
    ```python
    raise ConfigError("unknown key", key="optimizer.foo", line=7)
    ```
    """

    def __init__(self, message="", key: str = None, line: int = None):
        self.key = key
        self.line = line
        where = []
        if key:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class DatasetParseError(SasshaLabError):
    """
    Exception for malformed dataset files.

    Attributes
    ----------
    line : int
        1-based line number of the offending row.
    """

    def __init__(self, message="", line: int = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatchError(SasshaLabError):
    """Raised when vector, matrix or parameter dimensions disagree."""

    def __init__(self, message=""):
        super().__init__(message)


class PreconditionError(SasshaLabError):
    """Raised when an operation's pre-condition is violated."""

    def __init__(self, message=""):
        super().__init__(message)


class AsymmetricMatrixError(PreconditionError):
    """Raised when a matrix expected to be symmetric is not."""

    def __init__(self, message=""):
        super().__init__(message)


class DivergenceError(SasshaLabError):
    """
    Exception for non-finite optimizer updates.

    Attributes
    ----------
    step : int
        Step index at which the divergence was detected.
    quantity : str
        Name of the offending quantity (``"x"``, ``"loss"``, ``"d_bar"``, ...).
    """

    def __init__(self, message="", step: int = None, quantity: str = None):
        self.step = step
        self.quantity = quantity
        super().__init__(message)


class UsageError(SasshaLabError):
    """Raised for command-line usage problems."""

    def __init__(self, message=""):
        super().__init__(message)
