"""Exception types shared across the package.

Contract violations (bad shapes, out-of-range labels) raise plain
ValueError; everything tied to external data or configuration derives
from QemineError so callers can catch one base class.
"""


class QemineError(Exception):
    """Base class for data, format and configuration errors."""


class ParseError(QemineError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix += f"{line}: "
        elif path is not None:
            prefix += " "
        super().__init__(prefix + message)


class RangeError(ParseError):
    """A numeric field lies outside its documented range."""


class AlignmentError(QemineError):
    """Two files that must align line-by-line do not."""


class ConsistencyError(QemineError):
    """Cross-references between files do not resolve."""


class ModelFormatError(QemineError):
    """A model file has the wrong magic bytes or version."""


class ModelCorruptionError(QemineError):
    """A model file is truncated or fails its checksum."""


class ConfigError(QemineError):
    """A run configuration is unusable (empty dataset, unresolved option)."""


class TrainingError(QemineError):
    """Training aborted, e.g. on a non-finite gradient."""


class NotFittedError(QemineError):
    """An estimator method that needs a fitted model was called before fit."""
