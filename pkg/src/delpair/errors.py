"""Exception hierarchy shared by all delpair modules."""


class DelpairError(Exception):
    """Base class; the CLI maps it to exit status 2 or a failed report."""


class NotSymmetric(DelpairError):
    pass


class NotPositiveDefiniteImaginaryPart(DelpairError):
    pass


class GenusMismatch(DelpairError):
    pass


class TruncationRadiusOverflow(DelpairError):
    pass


class PoleAtEvaluationPoint(DelpairError):
    pass


class DivisorCollision(DelpairError):
    pass


class ThetaZeroOnDivisor(DelpairError):
    """Raised when a theta factor vanishes, i.e. the torsion has a zero there."""


class SingularPrymMatrix(DelpairError):
    pass


class TrivialCharacter(DelpairError):
    pass


class LambdaOnDivisor(DelpairError):
    pass


class StencilHitsSingularity(DelpairError):
    pass


class InvalidTask(DelpairError):
    pass
