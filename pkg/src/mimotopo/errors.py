"""Exception types raised by mimotopo."""


class ConfigurationError(ValueError):
    """Invalid topology, geometry, scenario or config file contents."""


class TensorFormatError(ValueError):
    """A measured-tensor file failed format validation."""


class SingularMatrixError(ArithmeticError):
    """A linear system or Gram matrix is singular or too ill-conditioned.

    ``condition`` carries the condition estimate when one is available,
    ``index`` the offending position in a batch of matrices and
    ``realization`` the 1-based Monte Carlo realization index, if known.
    """

    def __init__(self, message, condition=None, index=None, realization=None):
        super().__init__(message)
        self.condition = condition
        self.index = index
        self.realization = realization
