"""Exception hierarchy shared by every module."""


class KstError(Exception):
    """Base class for all package errors."""


class ParameterError(KstError, ValueError):
    """An argument is outside the operation's domain."""


class PreconditionError(ParameterError):
    """A structural precondition on the input does not hold."""


class StructuralError(KstError, ValueError):
    """The input object does not have the required shape."""


class InconsistencyError(KstError, ValueError):
    """Two pieces of supplied data contradict each other."""


class DuplicateCopyError(ParameterError):
    """A copy already present in a collection was inserted again."""


class ResourceError(KstError, RuntimeError):
    """A configured work budget was exhausted before completion."""


class FormatError(KstError, ValueError):
    """Malformed serialized input; carries a line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class DigestMismatchError(FormatError):
    """A serialized collection refers to a different host hypergraph."""
