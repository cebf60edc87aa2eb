"""Exception types shared across the workbench."""


class CatworkError(Exception):
    """Base class for every error raised by catwork."""


class PartialWitnessError(CatworkError):
    """An isomorphism check was handed a witness that is not total."""


class SearchCapExceeded(CatworkError):
    """Brute-force search was asked to run on a structure over the cap."""


class VocabularyError(CatworkError):
    """Unknown relation symbol, tag, or mismatched vocabularies."""


class UnboundVariableError(CatworkError):
    pass


class VariableCaptureError(CatworkError):
    pass


class MalformedTreeError(CatworkError):
    """The tree is not a truncation of a back-and-forth family member."""


class NotIsomorphicError(CatworkError):
    pass


class IncompatibleTruncationError(CatworkError):
    pass


class DominationError(CatworkError):
    """A bound failed to dominate a modulus; ``witness`` is the first bad index."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class CapsError(CatworkError):
    """Truncation caps are too small for the requested construction."""


class ClaimViolation(CatworkError):
    """A structural claim failed on a generated structure.

    This always indicates a construction bug; it is never caught and masked.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CopyMismatchError(CatworkError):
    """A presented copy does not match what the oracle data says it must be."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ScenarioError(CatworkError):
    """Scenario file failed validation. ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
