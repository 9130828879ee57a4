"""Exception hierarchy shared by all roadseg modules."""


class RoadSegError(Exception):
    """Base class for every error raised by roadseg."""


class DimensionMismatch(RoadSegError, ValueError):
    pass


class EmptySelection(RoadSegError, ValueError):
    """No pixel is both valid and a road-mask member."""


class InsufficientPixels(RoadSegError, ValueError):
    pass


class SingularDenominator(RoadSegError, ArithmeticError):
    pass


class SingularNormalMatrix(RoadSegError, ArithmeticError):
    pass


class DegenerateObjective(RoadSegError, ArithmeticError):
    """The analytic roots of the roll-angle objective are unavailable."""


class NonConvergence(RoadSegError, RuntimeError):
    pass


class DegenerateHistogram(RoadSegError, ValueError):
    pass


class InvalidSpec(RoadSegError, ValueError):
    pass


class ParseError(RoadSegError, ValueError):
    pass


class FormatError(RoadSegError, ValueError):
    pass


class EmptyMap(RoadSegError, ValueError):
    pass


class RangeError(RoadSegError, ValueError):
    pass
