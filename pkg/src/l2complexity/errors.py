"""Exception hierarchy.

Everything raised on bad input derives from :class:`L2ComplexityError`; the CLI
maps it to exit code 1. Plain ``OSError`` is left alone and maps to exit code 2.
"""


class L2ComplexityError(Exception):
    pass


class ValidationError(L2ComplexityError):
    pass


class CorpusFormatError(ValidationError):
    pass


class TreeParseError(ValidationError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class PatternSyntaxError(ValidationError):
    pass


class ResourceError(ValidationError):
    pass


class RegistryError(ValidationError):
    pass


class UndefinedWordError(ValidationError):
    pass


class UndefinedWERError(ValidationError):
    pass


class UndefinedCorrelationError(ValidationError):
    pass


class AlignmentMismatchError(ValidationError):
    pass


class DegenerateSelectionError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass
