"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* ``ValidationError`` -- the input is malformed (wrong shapes, a table that is
  not a group, a permutation that is not a bijection, ...).
* ``ScopeError`` -- the input is fine but the request is outside what the
  toolkit will compute (certification above dimension 3, p = 2 where the
  decomposition is not unique, ...).

Mathematical verdicts that a caller may want to branch on (``NotIsometry``,
``NonSpatialImage``, ...) derive from ``ValidationError`` because they mean
"this object does not have the structure you claimed".
"""


class LpError(Exception):
    pass


class ValidationError(LpError, ValueError):
    pass


class ScopeError(LpError):
    pass


class DimensionError(ValidationError):
    pass


class InvalidExponent(ValidationError):
    pass


class InvalidPermutation(ValidationError):
    pass


class EmptyOperatorError(ValidationError):
    pass


class InvalidConjugator(ValidationError):
    pass


class OracleScopeError(ScopeError):
    pass


class ExponentTwo(ScopeError):
    def __init__(self, what="this operation"):
        super().__init__(f"{what} is undefined at p = 2 (decomposition not unique)")


class NotIsometry(ValidationError):
    def __init__(self, message, exponent=None):
        super().__init__(message)
        self.exponent = exponent


class NotSpatialError(ValidationError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class InvalidGroup(ValidationError):
    pass


class InvalidSubgroup(ValidationError):
    pass


class InvalidNormalSubgroup(InvalidSubgroup):
    pass


class NotContractive(ValidationError):
    pass


class NonSpatialImage(ValidationError):
    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class NotHomomorphism(ValidationError):
    pass


class ArityError(ValidationError):
    pass


class AlgebraRelationError(ValidationError):
    pass


class InvalidGraph(ValidationError):
    pass


class InvalidAction(ValidationError):
    pass


class TruncationError(ScopeError):
    pass


class CoverageError(ValidationError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)
