"""
Exception hierarchy for the PSFM toolkit
"""

from typing import Optional


class PSFMError(Exception):
    """Base class for all toolkit errors"""


class InputError(PSFMError, ValueError):
    """Malformed input: wrong dimensions, bad file contents, bad CLI values"""

    def __init__(self, message: str, position: Optional[object] = None):
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
        self.position = position


class AliasingError(InputError):
    """Circle grid too coarse for the requested index window"""


class ContractViolation(PSFMError, ValueError):
    """A positive form was required but the input is not positive"""


class PreconditionError(PSFMError, ValueError):
    """Operation precondition not met (normalization, normality)"""


class ConsistencyError(PSFMError, RuntimeError):
    """Two constructions that must agree did not"""
