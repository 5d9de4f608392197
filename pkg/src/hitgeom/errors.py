"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, the
caller should fix it) and :class:`NumericDiagnostic` (a computation produced
something the mathematics forbids, which points at a numerical failure or a
bug). The CLI maps them to distinct exit codes.
"""


class HitgeomError(Exception):
    """Base class for all package errors."""


class ValidationError(HitgeomError, ValueError):
    pass


class NumericDiagnostic(HitgeomError, ArithmeticError):
    pass


# chain_core
class NotStochastic(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class Periodic(ValidationError):
    pass


class SingularSystem(NumericDiagnostic):
    pass


class DegenerateMass(NumericDiagnostic):
    pass


# dist
class InvalidParameter(ValidationError):
    pass


class TruncationCap(NumericDiagnostic):
    pass


class CompounderHasMassAtZero(ValidationError):
    pass


class DivergentMGF(NumericDiagnostic):
    pass


# sst
class NonMonotoneSeparation(NumericDiagnostic):
    pass


class NotDecreasing(NumericDiagnostic):
    pass


class NegativeSurvival(NumericDiagnostic):
    pass


class LemmaConditionFailed(ValidationError):
    pass


# hitting
class KacMismatch(NumericDiagnostic):
    pass


# greedy_dual
class NonTermination(NumericDiagnostic):
    pass


class NegativeQ(NumericDiagnostic):
    pass


class DegenerateStay(NumericDiagnostic):
    pass


# sim
class PathCap(NumericDiagnostic):
    pass
