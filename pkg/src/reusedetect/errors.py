"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """An input document violates its schema or an invariant.

    ``path`` locates the offending element, e.g. ``functions[2].blocks[0].succ[1]``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class IntegrityError(ValueError):
    """Inputs that must describe the same programs do not (program_id mismatch)."""
