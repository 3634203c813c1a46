"""Exception hierarchy shared by all razak modules."""


class RazakError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(RazakError):
    pass


class NotSelfAdjoint(RazakError):
    pass


class NotUnitary(RazakError):
    pass


class DimensionMismatch(RazakError):
    pass


class NotInCone(RazakError):
    """Scalar function violates the boundary relation g(0) = a/(a+1) g(1)."""


class LayoutMismatch(RazakError):
    pass


class ChainMismatch(RazakError):
    pass


class ZeroElement(RazakError):
    pass


class ContextMismatch(RazakError):
    pass


class StageOutOfRange(RazakError):
    pass


class ResourceLimit(RazakError):
    pass


class NoUnitalEmbedding(RazakError):
    pass


class ConfigError(RazakError):
    pass
