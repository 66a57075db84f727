"""Exception hierarchy shared by every module."""


class QCAError(Exception):
    """Base class for all library errors."""


class NotAUnit(QCAError, ValueError):
    pass


class NoSolution(QCAError, ValueError):
    """Raised by ``solve_linear``.

    ``certificate`` is a row vector ``y`` with ``y @ M == 0`` and ``y @ b != 0``
    modulo ``d``, which proves that ``M x = b`` has no solution.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NotIdempotent(QCAError, ValueError):
    pass


class ShapeMismatch(QCAError, ValueError):
    pass


LengthMismatch = ShapeMismatch


class RegisterMismatch(QCAError, ValueError):
    pass


class NotSymplectic(QCAError, ValueError):
    pass


class DimensionTooLarge(QCAError, ValueError):
    pass


class BlockConditionsViolated(QCAError, ValueError):
    def __init__(self, identity):
        super().__init__(f"block condition violated: {identity}")
        self.identity = identity


class NotAlternating(QCAError, ValueError):
    pass


class Singular(QCAError, ValueError):
    pass


class NoSplitting(QCAError, RuntimeError):
    pass


class ObstructedCorrection(QCAError, ValueError):
    pass


class NotComplementary(QCAError, ValueError):
    pass


class NotAComplement(QCAError, ValueError):
    pass


class NotFound(QCAError, LookupError):
    """A search finished without a hit.

    ``exhaustive`` is True when every candidate was examined, in which case
    the negative answer is conclusive for the searched family.
    """

    def __init__(self, message, exhaustive=False):
        super().__init__(message)
        self.exhaustive = exhaustive


class BudgetExceeded(NotFound):
    def __init__(self, message):
        super().__init__(message, exhaustive=False)


class OverlappingSupports(QCAError, ValueError):
    pass


class UnknownCell(QCAError, KeyError):
    pass


class SpaceMismatch(QCAError, ValueError):
    pass


class BadPartition(QCAError, ValueError):
    pass


class FormationsDiffer(QCAError, ValueError):
    pass


class NotSymmetric(QCAError, ValueError):
    pass


class ABlockSingular(QCAError, ValueError):
    """No Hadamard pre-layer in the strategy made the X-to-X block invertible.

    This is inconclusive; it says nothing about whether the QCA is trivial.
    """


class CutTooClose(QCAError, ValueError):
    pass


class SupportTouchesBoundary(QCAError, ValueError):
    pass


class InvariantError(QCAError, AssertionError):
    """A constructed object failed its own post-condition check."""


class SchemaError(QCAError, ValueError):
    """Malformed JSON input."""
