"""Exception hierarchy shared by all modules."""


class LatticeHeatError(Exception):
    """Base class for library errors."""


class InvalidInputError(LatticeHeatError, ValueError):
    """Non-finite values, out-of-range parameters, malformed descriptors."""


class SpecMismatchError(LatticeHeatError, ValueError):
    """Operands live on different lattices or have incompatible shapes."""


class AliasingError(LatticeHeatError, ValueError):
    """Quadrature too coarse for the requested stencil radius."""


class SymmetryError(LatticeHeatError, ArithmeticError):
    """Quadrature produced an imaginary residue above the allowed bound."""


class PositivityError(LatticeHeatError, ValueError):
    """A diffusion coefficient failed the strict positivity gate."""


class GridResolutionError(LatticeHeatError, ValueError):
    """Time grid does not resolve the mollifier scale."""


class NumericalError(LatticeHeatError, ArithmeticError):
    """Non-finite intermediate in a solve."""
