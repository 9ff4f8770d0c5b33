"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`MatfoundError`,
so callers (and the CLI) can catch one type.
"""


class MatfoundError(Exception):
    """Base class for all library errors."""


# -- matroid core -----------------------------------------------------------

class MatroidError(MatfoundError):
    pass


class EmptyBasisFamily(MatroidError):
    pass


class UnequalCardinality(MatroidError):
    pass


class ExchangeAxiomViolated(MatroidError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class ElementNotInGround(MatroidError):
    pass


class CorankOutOfRange(MatroidError):
    pass


class NotAFlat(MatroidError):
    pass


class NotAHyperplane(MatroidError):
    pass


class GroundSetTooLarge(MatroidError):
    pass


class DuplicateLabel(MatroidError):
    pass


class UnknownMatroid(MatroidError):
    pass


# -- constructions ------------------------------------------------------------

class ConstructionError(MatfoundError):
    pass


class LabelCollision(ConstructionError):
    pass


class NotModularInRight(ConstructionError):
    pass


class RestrictionMismatch(ConstructionError):
    pass


class BasepointLoopOrColoop(ConstructionError):
    pass


class CircuitAxiomViolated(ConstructionError):
    pass


class RestrictionNotUniform(ConstructionError):
    pass


class NotCoindependent(ConstructionError):
    pass


# -- pastures -----------------------------------------------------------------

class PastureError(MatfoundError):
    pass


class NotAGroup(PastureError):
    pass


class P1Violated(PastureError):
    pass


class P2ClosureContradiction(PastureError):
    pass


class P3Missing(PastureError):
    pass


class P3NotUnique(PastureError):
    pass


class UnknownName(PastureError):
    pass


class NotPrimePower(PastureError):
    pass


class SourceTargetMismatch(PastureError):
    pass


# -- representations ----------------------------------------------------------

class RepresentationError(MatfoundError):
    pass


class SupportViolation(RepresentationError):
    pass


class SearchBudgetExceeded(RepresentationError):
    def __init__(self, msg, nodes=None):
        super().__init__(msg)
        self.nodes = nodes


class NotAGpcMatroid(RepresentationError):
    pass


class TRestrictionsNotIsomorphic(RepresentationError):
    pass


class HarmonizationFailed(RepresentationError):
    pass


class NoAdmissibleH0(RepresentationError):
    pass


class ExtensionAmbiguous(RepresentationError):
    pass


class NormalizationImpossible(RepresentationError):
    pass


class NoDisjointCorank2Flat(RepresentationError):
    pass


class NMustBeAtLeast3(RepresentationError):
    pass


class NotModularSystem(RepresentationError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


# -- cli ------------------------------------------------------------------------

class ParseError(MatfoundError):
    def __init__(self, msg, location=None):
        if location:
            msg = f"{location}: {msg}"
        super().__init__(msg)
        self.location = location


class ValidationError(MatfoundError):
    pass


class HypothesisFailed(MatfoundError):
    def __init__(self, name, detail=""):
        super().__init__(f"hypothesis {name!r} failed" + (f": {detail}" if detail else ""))
        self.name = name
