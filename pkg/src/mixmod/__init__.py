"""Mixed moduli of smoothness, angle approximation and Lorentz norms of
multivariate trigonometric polynomials."""
from .lorentz import LorentzIndex, Sampling, norm
from .smoothness import FractionalOrder, ModulusSearchConfig, modulus
from .spectrum import SpectralFunction

__all__ = ["SpectralFunction", "LorentzIndex", "Sampling", "norm", "FractionalOrder",
           "ModulusSearchConfig", "modulus"]
__version__ = "0.1.0"
