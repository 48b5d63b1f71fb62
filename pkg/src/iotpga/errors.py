"""Exception hierarchy shared by every module."""


class PGAError(Exception):
    """Base class for all errors raised by iotpga."""


class InvalidParameter(PGAError, ValueError):
    """A parameter is outside its allowed range."""


class InvalidInput(PGAError, ValueError):
    """Input data has the wrong shape or is empty."""


class InsufficientData(PGAError, ValueError):
    """A series is too short for the requested cluster count."""


class DatasetError(PGAError):
    """A dataset file is inconsistent after loading."""


class ParseError(DatasetError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConfigError(PGAError):
    """Experiment configuration is malformed or has unknown keys."""
