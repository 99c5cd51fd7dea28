"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where the operation is defined."""


class SingularityReached(ArithmeticError):
    """Backward integration of a profile ODE hit a finite-time blow-up.

    ``t_last`` is the last accepted abscissa (in ``t``), ``g_last`` the
    profile value there.
    """

    def __init__(self, message, t_last, g_last):
        super().__init__(message)
        self.t_last = t_last
        self.g_last = g_last
