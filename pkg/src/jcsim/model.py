"""Physical parameters, resonances and the Lorentzian input pulse.

All frequencies are detunings from the bare cavity frequency, which is the
origin of the frequency axis. The default unit of frequency is the
cavity-waveguide decay rate (kappa = 1); times are then in units of 1/kappa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "SystemParams",
    "PulseSpec",
    "Resonances",
    "resonances",
    "single_photon_resonances",
    "two_photon_resonances",
    "pulse_sdf",
    "pulse_time_profile",
    "single_photon_phase",
]


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """Jaynes-Cummings system coupled to a chiral waveguide.

    Parameters
    ----------
    g : float
        Atom-cavity coupling, ``g >= 0``.
    kappa : float
        Cavity decay rate into the waveguide, ``kappa > 0``.
    delta_a : float
        Atom-cavity detuning ``omega_a - omega_c``.
    """

    g: float
    kappa: float = 1.0
    delta_a: float = 0.0

    def __post_init__(self):
        g = _finite("g", self.g)
        kappa = _finite("kappa", self.kappa)
        delta_a = _finite("delta_a", self.delta_a)
        if g < 0:
            raise ConfigError("g must be ≥ 0")
        if kappa <= 0:
            raise ConfigError("kappa must be > 0")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "delta_a", delta_a)

    @property
    def f(self) -> float:
        """Waveguide-cavity coupling sqrt(kappa / 2 pi)."""
        return math.sqrt(self.kappa / (2.0 * math.pi))

    @property
    def omega_a(self) -> float:
        """Atomic transition frequency in the cavity-offset frame."""
        return self.delta_a

    @property
    def omega_c_tilde(self) -> complex:
        """Complex cavity frequency ``-i kappa / 2``."""
        return -0.5j * self.kappa

    @property
    def delta_a_tilde(self) -> complex:
        return self.delta_a - self.omega_c_tilde

    @property
    def rabi_frequency(self) -> float:
        """Vacuum Rabi frequency sqrt(g^2 + (delta_a/2)^2)."""
        return math.hypot(self.g, 0.5 * self.delta_a)


@dataclass(frozen=True)
class PulseSpec:
    """Lorentzian single-photon wave packet.

    ``scale`` multiplies both the spectral amplitude and its time profile; it
    is 1 for the analytically normalised pulse and is changed only by
    :meth:`rescaled` (discrete renormalisation on a finite grid).
    """

    gamma0: float
    omega0: float = 0.0
    t0: float = 0.0
    photon_count: int = 2
    scale: float = 1.0

    def __post_init__(self):
        gamma0 = _finite("gamma0", self.gamma0)
        if gamma0 <= 0:
            raise ConfigError("gamma0 must be > 0")
        object.__setattr__(self, "gamma0", gamma0)
        object.__setattr__(self, "omega0", _finite("omega0", self.omega0))
        object.__setattr__(self, "t0", _finite("t0", self.t0))
        if self.photon_count not in (1, 2):
            raise ConfigError("photon_count must be 1 or 2")
        scale = _finite("scale", self.scale)
        if scale <= 0:
            raise ConfigError("scale must be > 0")
        object.__setattr__(self, "scale", scale)

    @property
    def tau_p(self) -> float:
        """Pulse duration, taken as exactly 1/gamma0."""
        return 1.0 / self.gamma0

    @property
    def pole(self) -> complex:
        """Pole of the spectral amplitude, ``omega0 - i gamma0/2``."""
        return complex(self.omega0, -0.5 * self.gamma0)

    def rescaled(self, factor: float) -> "PulseSpec":
        return replace(self, scale=self.scale * float(factor))


@dataclass(frozen=True)
class Resonances:
    """Complex one- and two-excitation poles of the open JC system.

    ``r1`` and ``r2`` are defined as ``e_plus - e_minus`` so that they stay
    consistent with the labelling convention even when the principal square
    root would order the pair the other way.
    """

    e1_plus: complex
    e1_minus: complex
    e2_plus: complex
    e2_minus: complex
    r1: complex
    r2: complex


def _label(a: complex, b: complex) -> tuple[complex, complex]:
    # "+" has the larger real part; ties go to the larger imaginary part
    if (a.real, a.imag) >= (b.real, b.imag):
        return a, b
    return b, a


def single_photon_resonances(params: SystemParams) -> tuple[complex, complex]:
    """Return ``(E1+, E1-)`` for the single-excitation manifold."""
    wc = params.omega_c_tilde
    if params.g == 0.0:
        # decoupled limit, exact: bare atom and bare lossy cavity
        return _label(complex(params.omega_a), wc)
    dt = params.delta_a_tilde
    root = complex(np.sqrt(complex(4.0 * params.g**2 + dt * dt)))
    centre = wc + 0.5 * dt
    return _label(centre + 0.5 * root, centre - 0.5 * root)


def two_photon_resonances(params: SystemParams) -> tuple[complex, complex]:
    """Return ``(E2+, E2-)`` for the two-excitation manifold."""
    wc = params.omega_c_tilde
    if params.g == 0.0:
        return _label(2.0 * wc, wc + params.omega_a)
    dt = params.delta_a_tilde
    root = complex(np.sqrt(complex(8.0 * params.g**2 + dt * dt)))
    centre = 2.0 * wc + 0.5 * dt
    return _label(centre + 0.5 * root, centre - 0.5 * root)


def resonances(params: SystemParams) -> Resonances:
    e1p, e1m = single_photon_resonances(params)
    e2p, e2m = two_photon_resonances(params)
    return Resonances(e1p, e1m, e2p, e2m, e1p - e1m, e2p - e2m)


def pulse_sdf(pulse: PulseSpec, z):
    """Spectral amplitude of the Lorentzian pulse at (possibly complex) ``z``.

    Raises
    ------
    DomainError
        If ``z`` coincides with the pole ``omega0 - i gamma0/2``.
    """
    z = np.asarray(z)
    detuning = z - pulse.omega0
    denom = detuning + 0.5j * pulse.gamma0
    if np.any(np.abs(denom) <= 1e-300):
        raise DomainError("pulse_sdf evaluated at its pole omega0 - i*gamma0/2")
    amp = pulse.scale * math.sqrt(pulse.gamma0 / (2.0 * math.pi))
    out = amp / denom
    if pulse.t0 != 0.0:
        out = out * np.exp(1j * detuning * pulse.t0)
    return out[()] if out.ndim == 0 else out


def pulse_time_profile(pulse: PulseSpec, t):
    """Fourier transform ``int dw exp(-i w t) xi_w`` of the pulse amplitude.

    Equals ``-i sqrt(2 pi gamma0) exp(-i omega0 t) exp(-gamma0 (t - t0)/2)``
    for ``t >= t0`` and zero before the arrival time.
    """
    t = np.asarray(t, dtype=float)
    amp = -1j * pulse.scale * math.sqrt(2.0 * math.pi * pulse.gamma0)
    s = t - pulse.t0
    on = s >= 0.0
    out = np.where(
        on,
        amp * np.exp(-1j * pulse.omega0 * t - 0.5 * pulse.gamma0 * np.where(on, s, 0.0)),
        0.0j,
    )
    return out[()] if out.ndim == 0 else out


def _unit_phase(omega, pole):
    d = omega - pole
    mod = np.abs(d)
    # a real pole (decoupled atom at g = 0) is removable on the real axis
    return np.where(mod > 0.0, d / np.where(mod > 0.0, mod, 1.0), 1.0 + 0.0j)


def phase_ratio(params: SystemParams, omega):
    """Unit-modulus ratio whose argument is the single-photon phase shift."""
    omega = np.asarray(omega, dtype=float)
    e1p, e1m = single_photon_resonances(params)
    u = _unit_phase(omega, e1p) * _unit_phase(omega, e1m)
    return np.conj(u) ** 2


def single_photon_phase(params: SystemParams, omega):
    """Phase shift acquired by a single photon of frequency ``omega``.

    Returned in ``(-pi, pi]``.
    """
    theta = np.angle(phase_ratio(params, omega))
    theta = np.where(theta <= -np.pi, theta + 2.0 * np.pi, theta)
    return theta[()] if np.ndim(theta) == 0 else theta
