"""Few-photon scattering on a waveguide-coupled Jaynes-Cummings system.

Two independent computation paths are provided: time integration of the
one- and two-excitation amplitudes on a frequency grid (:mod:`jcsim.dynamics`)
and closed-form Laplace-domain amplitudes (:mod:`jcsim.analytic`). Spectra
and Schmidt analysis of the scattered pair build on either.
"""
from .errors import ConfigError, DomainError, IntegrationError, JCSimError, NumericalError
from .model import PulseSpec, SystemParams, resonances

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "IntegrationError",
    "JCSimError",
    "NumericalError",
    "PulseSpec",
    "SystemParams",
    "resonances",
    "__version__",
]
