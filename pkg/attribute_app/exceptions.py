class AttributeDictionaryError(Exception):
    """Base class for every error raised by attribute_app."""


class InputError(AttributeDictionaryError, ValueError):
    """Invalid input data or a violated operation precondition."""


class ComputationError(AttributeDictionaryError, ArithmeticError):
    """A numerical step could not be carried out (e.g. a non-PD block)."""
