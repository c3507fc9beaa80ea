"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes: ConfigError -> 2,
DataError -> 3, ModelError -> 4. Anything else is a genuine crash.
"""


class PathNLIError(Exception):
    """Base class for all package errors."""


class ConfigError(PathNLIError):
    """Invalid configuration file, key, or value."""


class DataError(PathNLIError):
    """Malformed or inconsistent input data."""


class KGFormatError(DataError):
    """Bad line in a knowledge-graph triple file."""


class QAFormatError(DataError):
    """Bad line in a question-answer file."""


class PHLFormatError(DataError):
    """Bad record in a premise-hypothesis-label file."""


class WordVectorFormatError(DataError):
    """Bad line in a word-vector file."""


class TemplateError(DataError):
    """Missing or malformed verbalization template."""


class UnanswerableQuestionError(DataError):
    """No gold answer is reachable from the question entities."""


class UnsupportedQuestionError(DataError):
    """Question shape the pipeline cannot handle (e.g. no WH-word)."""


class UnlinkableQuestionError(DataError):
    """No entity mention in the question could be linked to the graph."""


class ModelError(PathNLIError):
    """Inconsistent model inputs, parameters, or checkpoints."""
