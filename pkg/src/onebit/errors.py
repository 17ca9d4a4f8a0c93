"""Exception types shared by the model, recovery and experiment stages."""
from __future__ import annotations

from typing import Any, Dict


class InvalidParameterError(ValueError):
    """Raised when an argument or config field is outside its domain."""


class TrialError(RuntimeError):
    """A single Monte-Carlo trial failed; carries enough provenance to rerun it."""

    def __init__(self, message: str, provenance: Dict[str, Any]):
        self.message = message
        self.provenance = dict(provenance)
        details = ", ".join(f"{key}={value}" for key, value in self.provenance.items())
        super().__init__(f"{message} ({details})")

    def __reduce__(self):
        # worker processes send exceptions back pickled
        return (self.__class__, (self.message, self.provenance))
