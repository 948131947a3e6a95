"""Exception types raised across the package."""


class TwistCertError(Exception):
    pass


class NotInSubgroup(TwistCertError):
    pass


class PoleSingularity(TwistCertError):
    pass


class StageHasNoClosedForm(TwistCertError):
    pass


class MissingField(TwistCertError):
    pass


class NonpositiveScale(TwistCertError):
    pass


class DegenerateMetric(TwistCertError):
    pass


class FrameNotOrthonormal(TwistCertError):
    pass


class StageConstructionFailure(TwistCertError):
    def __init__(self, message, psi=None, beta=None):
        super().__init__(message)
        self.psi = psi
        self.beta = beta


class NoPassingAlpha(TwistCertError):
    pass


class NoFeasibleProfile(TwistCertError):
    pass


class ProfileConstructionFailure(TwistCertError):
    pass


class OutOfRange(TwistCertError):
    pass


class InsufficientRange(TwistCertError):
    pass


class UnknownRegime(TwistCertError):
    pass


class InvalidStage(TwistCertError, ValueError):
    pass
