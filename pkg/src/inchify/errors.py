"""Exception types shared across the package."""


class ChemError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ChemError):
    """SMILES text could not be parsed.

    Carries the byte offset of the offending character so callers can
    point at the exact position in the input line.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class GraphError(ChemError):
    """Invalid operation on a molecular graph (unknown atom id, missing bond)."""


class KekulizationError(ChemError):
    """No alternating single/double assignment exists for an aromatic system."""

    def __init__(self, message: str, atoms=()):
        super().__init__(message)
        self.atoms = tuple(atoms)


class FixpointError(ChemError):
    """A rewrite rule exceeded its application cap; signals a rule bug."""


class PipelineError(ChemError):
    """A normalization step failed; carries the 1-based step index."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class CorpusError(ChemError):
    """Corpus file missing, malformed, or not sorted as required."""
