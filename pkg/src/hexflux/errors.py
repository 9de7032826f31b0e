"""Exception hierarchy shared by the numerical modules and the CLI."""


class HexfluxError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InvalidFluxError(HexfluxError, ValueError):
    exit_code = 2


class DomainError(HexfluxError, ValueError):
    """An argument lies outside the domain where an operation is defined."""

    exit_code = 2


class NumericContractError(HexfluxError, ArithmeticError):
    """A numerical guarantee (hermiticity, convergence, tolerance) was violated."""


class NotInGapError(HexfluxError, ValueError):
    """Raised when an energy expected to lie in a spectral gap sits inside a band."""

    exit_code = 2

    def __init__(self, mu, interval):
        self.mu = mu
        self.interval = interval
        super().__init__(f"energy {mu!r} lies inside the band {interval!r}")


class GapTrackingError(HexfluxError):
    """A gap containing the Fermi energy could not be followed across nearby fluxes."""


class ConfigError(HexfluxError, ValueError):
    exit_code = 2
