"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
process exit statuses without a lookup table.
"""


class CantorDimError(Exception):
    exit_code = 1


class ProblemParseError(CantorDimError, ValueError):
    exit_code = 2


class MethodInapplicable(CantorDimError):
    """The requested method does not apply to this system."""

    exit_code = 3


class NumericalGuard(CantorDimError, ArithmeticError):
    """A numerical safety check tripped (divergent logs, resonance, ...)."""

    exit_code = 4


# -- inapplicable -----------------------------------------------------------


class NotDegenerate(MethodInapplicable):
    pass


class DegenerateMap(MethodInapplicable):
    pass


class RatioNotContractive(MethodInapplicable):
    pass


class NacFailed(MethodInapplicable):
    pass


class NoConjugator(MethodInapplicable):
    pass


class TheoremHypothesis(MethodInapplicable, ValueError):
    pass


# -- Möbius algebra -----------------------------------------------------------


class SingularPhi(CantorDimError, ValueError):
    exit_code = 3


class IdentityMap(CantorDimError, ValueError):
    pass


class PoleInside(CantorDimError, ValueError):
    pass


# -- numerical guards ---------------------------------------------------------


class ZeroRowSum(NumericalGuard):
    pass


class UnboundedIntegrand(NumericalGuard):
    pass


class ResonantDenominator(NumericalGuard):
    pass


class ZeroProduct(NumericalGuard):
    pass
