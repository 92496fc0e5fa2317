"""Exception types shared across the package."""


class BoseGPError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(BoseGPError, ValueError):
    """An input violates a documented precondition."""


class ResolutionError(BoseGPError, RuntimeError):
    """A numerical procedure could not reach the requested accuracy.

    The message says which knob to turn (larger ``p_max``, tighter grid, ...).
    """


class EmptyLatticeError(ContractError):
    """The truncation radius lies below the first nonzero lattice shell."""


class PositivityError(ContractError):
    """The convolved potential is negative on a Bogoliubov mode."""
