"""Exception hierarchy shared by every module of the package."""


class PadicError(Exception):
    """Base class for all errors raised by padicdml."""


class IncompatiblePrime(PadicError, ValueError):
    pass


class NotPrime(PadicError, ValueError):
    pass


class DenominatorDivisibleByP(PadicError, ValueError):
    pass


class DivisionByInexactZero(PadicError, ZeroDivisionError):
    pass


class PrecisionExhausted(PadicError, ArithmeticError):
    pass


class IndeterminateValuation(PadicError, ArithmeticError):
    pass


class NotAUnit(PadicError, ValueError):
    pass


# series
class CompositionDiverges(PadicError, ArithmeticError):
    pass


class OutsideConvergenceDisk(PadicError, ArithmeticError):
    pass


class OutsideExpDomain(PadicError, ValueError):
    pass


class OutsideLogDomain(PadicError, ValueError):
    pass


# newton polygons
class InsufficientPrecision(PadicError, ArithmeticError):
    pass


class NoCertificate(PadicError, ValueError):
    pass


# linearization
class NotHomothety(PadicError, ValueError):
    pass


class ZeroMultiplier(PadicError, ValueError):
    pass


class UnsupportedRegime(PadicError, ValueError):
    pass


class NonUnitEigenvalue(PadicError, ValueError):
    pass


class MultiplicativeRelationFound(PadicError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# jordan / linear algebra
class UnsupportedFieldExtension(PadicError, ValueError):
    pass


# solvers
class NoPrimeFound(PadicError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BitGrowthExceeded(PadicError):
    pass


class CoordinateNotUnit(PadicError, ValueError):
    pass


class NoPeriodicPointFound(PadicError):
    pass


class NonSimpleRoot(PadicError):
    def __init__(self, message, root_mod_p=None):
        super().__init__(message)
        self.root_mod_p = root_mod_p


class BasinNotReached(PadicError):
    pass


class AllStrategiesFailed(PadicError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CrossCheckFailed(PadicError, AssertionError):
    """A solver answer disagreed with exact iteration; never silenced."""


class ParseError(PadicError, ValueError):
    pass
