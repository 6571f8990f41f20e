"""Exception hierarchy shared by every module of the package."""


class ZermeloError(Exception):
    """Base class for all errors raised by this package."""


class PointOutsideDomain(ZermeloError, ValueError):
    def __init__(self, point, domain=None):
        self.point = tuple(float(v) for v in point)
        self.domain = domain
        msg = f"point {self.point} lies outside the wind domain"
        if domain is not None:
            msg += f" {domain.bounds}"
        super().__init__(msg)


class FieldNotWeak(ZermeloError, ValueError):
    """The drift field reaches ``max_norm`` > ``margin`` at ``location``."""

    def __init__(self, max_norm, location, margin):
        self.max_norm = float(max_norm)
        self.location = tuple(float(v) for v in location)
        self.margin = float(margin)
        super().__init__(
            f"wind is not weak: |w| = {self.max_norm:.6g} at {self.location} "
            f"exceeds margin {self.margin:g}"
        )


class ParseError(ZermeloError, ValueError):
    pass


class StrongWind(ZermeloError, ValueError):
    pass


class ZeroVector(ZermeloError, ValueError):
    pass


class StencilOutsideDomain(ZermeloError, ValueError):
    pass


class DomainExit(ZermeloError):
    """Integration left the wind domain; ``trajectory`` holds the truncated path."""

    def __init__(self, trajectory):
        self.trajectory = trajectory
        super().__init__(f"trajectory left the domain at t = {trajectory.t[-1]:.6g}")


class StepSizeUnderflow(ZermeloError, ArithmeticError):
    pass


class NotOnIndicatrix(ZermeloError, ValueError):
    pass


class NoConvergence(ZermeloError, RuntimeError):
    pass


class GoalUnreachable(ZermeloError, RuntimeError):
    pass
