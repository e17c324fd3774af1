"""Exception hierarchy.

Every error carries a short ``category`` string (printed by the CLI on
stderr) and the process ``exit_code`` the CLI maps it to.
"""


class TabweaveError(Exception):
    category = "error"
    exit_code = 3


class DomainError(TabweaveError, ValueError):
    category = "domain"


class UnderdeterminedError(DomainError):
    category = "underdetermined"
    exit_code = 2


class DegenerateInputError(DomainError):
    category = "degenerate-input"
    exit_code = 2


class DegenerateSeparatorError(DomainError):
    category = "degenerate-separator"
    exit_code = 2


class ParseError(TabweaveError, ValueError):
    category = "parse"
    exit_code = 2

    def __init__(self, message, position=None):
        if position is not None:
            message = f"token {position}: {message}"
        super().__init__(message)
        self.position = position


class CompositionError(TabweaveError):
    category = "composition"

    def __init__(self, message, cell_index=None):
        if cell_index is not None:
            message = f"cell {cell_index}: {message}"
        super().__init__(message)
        self.cell_index = cell_index


class NoClosureError(CompositionError):
    category = "no-closure"


class OrientationError(CompositionError):
    category = "orientation"


class StructureConflictError(CompositionError):
    category = "structure-conflict"


class RemapError(TabweaveError):
    category = "remap"

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class GenerationError(TabweaveError, ValueError):
    category = "generation"
    exit_code = 2


class ValidationError(TabweaveError, ValueError):
    """Schema violation; ``path`` is a JSON pointer into the document."""

    category = "validation"
    exit_code = 2

    def __init__(self, path, message):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
