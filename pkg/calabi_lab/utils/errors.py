"""
Exception hierarchy for calabi_lab
"""


class CalabiError(Exception):
    """Base class for every error raised by the library"""


class WeightDomainError(CalabiError):
    """A weight was built with bad parameters or evaluated outside its domain"""


class GridError(CalabiError):
    """Invalid grid, or a field whose size does not match its grid"""


class SpacelikeError(CalabiError):
    """Too many nodes of a Lorentzian surface fail |grad u| < 1"""


class IntegrationError(CalabiError):
    """The potential gradient cannot be integrated over the valid region"""


class FoldOverError(CalabiError):
    """The horizontal projection of an image surface folds over itself"""

    def __init__(self, message, cells=None):
        super().__init__(message)
        self.cells = list(cells or [])


class ProfileError(CalabiError):
    """An ODE profile could not be seeded or continued"""


class ConfigError(CalabiError):
    """Malformed command-line or environment configuration"""
