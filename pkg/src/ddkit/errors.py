"""Exception types shared across the toolkit."""


class DDKitError(Exception):
    """Base class for all toolkit errors."""


class ConstraintViolation(DDKitError):
    """A Paley-order triple sets more than one axis at the same binary digit."""

    def __init__(self, bit, axes):
        self.bit = bit
        self.axes = tuple(axes)
        names = " and ".join(f"n_{a}" for a in self.axes)
        super().__init__(
            f"one-nonzero-digit constraint violated at bit {bit}: set in {names}"
        )


class RegimeError(DDKitError):
    """beta and J are too close for the leading-order bound to be meaningful."""


class PrincipalBranchError(DDKitError):
    """The principal matrix logarithm is unreliable because ||H||*T >= pi."""


class DegenerateDraw(DDKitError):
    """A sampled bath operator came out with zero norm; redraw."""


class UnsupportedOrder(DDKitError):
    """Requested expansion order is not implemented for this input."""


class ConfigError(DDKitError):
    """A scan configuration file is malformed or inconsistent."""
