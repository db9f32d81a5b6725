"""Error taxonomy.

Every failure mode carries a witness where one exists, so callers can report
the exact arrow/object/triple that broke an axiom instead of a bare boolean.
Exit-code families used by the CLI: parse (2), validation (3), caps (4),
undecided (5).
"""


class OmegakitError(Exception):
    """Base class for all library errors."""


class ParseError(OmegakitError):
    """A document failed to parse against its schema."""

    def __init__(self, message, path=None, location=None):
        self.path = path
        self.location = location
        prefix = ""
        if path is not None:
            prefix = f"{path}: "
            if location is not None:
                prefix = f"{path}:{location}: "
        super().__init__(prefix + message)


class ValidationError(OmegakitError):
    """An axiom or precondition failed on otherwise well-formed data."""


class MissingComposite(ValidationError):
    pass


class NonAssociative(ValidationError):
    pass


class BadIdentity(ValidationError):
    pass


class DomCodMismatch(ValidationError):
    pass


class Incomposable(ValidationError):
    pass


class IncompatibleEndpoints(ValidationError):
    pass


class UnsupportedBase(ValidationError):
    pass


class UnsupportedValueCategory(ValidationError):
    pass


class NoPullback(ValidationError):
    pass


class NoLift(ValidationError):
    pass


class KappaNotFaithful(ValidationError):
    pass


class NotAcyclic(ValidationError):
    pass


class NotAcyclicUnbounded(NotAcyclic):
    pass


class NotAssociativeUpToSk(ValidationError):
    pass


class LevelCapExceeded(ValidationError):
    pass


class CapError(OmegakitError):
    """A configured search or size cap was hit; no partial answer is kept."""


class SizeCapExceeded(CapError):
    pass


class CapExceeded(CapError):
    pass


class ClosureCapExceeded(CapError):
    pass


class Undecided(OmegakitError):
    """A bounded search ended without deciding either way."""


class DepthCapExceeded(Undecided):
    pass
