"""Exception hierarchy shared by the library and the command-line front end."""


class SmoothCopulaError(Exception):
    """Base class of every error raised by smoothcopula"""

    exit_code = 1


class GrammarError(SmoothCopulaError, ValueError):
    """An estimator or model string does not follow the grammar"""

    exit_code = 2


class ConfigurationError(SmoothCopulaError, ValueError):
    """A configuration file or flag combination is invalid"""

    exit_code = 2


class DomainError(SmoothCopulaError, ValueError):
    """A numeric argument lies outside the domain of an operation"""

    exit_code = 3


class DataIOError(SmoothCopulaError, OSError):
    """Reading or writing a data file failed"""

    exit_code = 4
