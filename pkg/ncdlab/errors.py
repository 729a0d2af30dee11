"""Exception hierarchy shared by every ncdlab module

The CLI maps these onto exit codes: validation and parse problems exit
with 2, everything else derived from NcdLabError exits with 3.
"""

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class NcdLabError(Exception):
    """Base class of all errors raised on purpose by ncdlab"""

    exit_code = EXIT_RUNTIME


class ValidationError(NcdLabError, ValueError):
    """An argument or configuration value is outside its allowed domain"""

    exit_code = EXIT_VALIDATION


class EmptyInputError(ValidationError):
    """A document, table or corpus that must hold data is empty"""


class LevelError(ValidationError):
    """A distortion level is not on the 0.0, 0.1, ..., 1.0 grid"""


class UnsupportedSizeError(ValidationError):
    """A cluster is too large for the exhaustive perfect-sum search"""


class ParseError(NcdLabError):
    """A text input (frequency list, matrix, tree, assignment) is malformed"""

    exit_code = EXIT_VALIDATION

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class DecodeError(NcdLabError):
    """Bytes that cannot be decoded under the strict text policy"""

    exit_code = EXIT_VALIDATION

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class CorruptStreamError(NcdLabError):
    """A compressed stream has a bad header or inconsistent contents"""


class BackendFaultError(NcdLabError):
    """A compressor produced an NCD value no sane backend can produce"""
