"""One-photon spectra of the incoming and scattered two-photon wave packets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import ScatteredSDF
from .dynamics import FrequencyGrid
from .errors import NumericalError
from .model import PulseSpec, pulse_sdf

__all__ = ["SpectrumResult", "input_spectrum", "output_spectrum", "lorentzian_tail"]


def lorentzian_tail(pulse: PulseSpec, grid: FrequencyGrid) -> float:
    """Fraction of the continuum pulse norm lying outside ``grid``.

    A Lorentzian of width ``gamma0`` centred at ``omega0`` carries
    ``(atan(2 b / gamma0) - atan(2 a / gamma0)) / pi`` of its weight on
    ``[omega0 + a, omega0 + b]``.
    """
    w = grid.points
    a = 2.0 * (w[0] - pulse.omega0) / pulse.gamma0
    b = 2.0 * (w[-1] - pulse.omega0) / pulse.gamma0
    return 1.0 - (math.atan(b) - math.atan(a)) / math.pi


def input_spectrum(pulse: PulseSpec, grid: FrequencyGrid) -> np.ndarray:
    """Photon density ``2 |xi_w|^2`` of the incoming two-photon state."""
    return 2.0 * np.abs(pulse_sdf(pulse, grid.points)) ** 2


@dataclass
class SpectrumResult:
    """Scattered one-photon spectrum and its decomposition.

    ``s_out = s_in + s_inel + s_el_in``; the interference term ``s_el_in``
    may be negative. ``integrals`` holds trapezoidal integrals of each
    component, ``tail`` the continuum weight of the (renormalised) input
    missing from the grid.
    """

    grid: FrequencyGrid
    s_in: np.ndarray
    s_out: np.ndarray
    s_inel: np.ndarray
    s_el_in: np.ndarray
    integrals: dict = field(default_factory=dict)
    tail: float = 0.0

    def decomposition_residual(self) -> float:
        return float(np.max(np.abs(self.s_out - (self.s_in + self.s_inel + self.s_el_in))))


def output_spectrum(sdf: ScatteredSDF, check: bool = True) -> SpectrumResult:
    """Spectra of the scattered pair from its two-photon amplitude.

    Every sum over the partner frequency uses the trapezoidal weights of
    ``sdf.grid``. ``s_in`` is taken from the elastic part,
    ``2 sum_j |elastic[k, j]|^2 dw``, which equals ``2 |xi_k|^2`` when the
    pulse is normalised on the grid; this keeps the decomposition exact.

    Raises
    ------
    NumericalError
        If ``check`` is set and the decomposition or positivity invariants
        are violated (which would indicate a corrupted amplitude).
    """
    wts = sdf.grid.weights
    el, inel, tot = sdf.elastic, sdf.inelastic, sdf.total
    s_out = 2.0 * (np.abs(tot) ** 2) @ wts
    s_inel = 2.0 * (np.abs(inel) ** 2) @ wts
    s_el_in = 4.0 * np.real(np.conj(el) * inel) @ wts
    s_in = 2.0 * (np.abs(el) ** 2) @ wts
    res = SpectrumResult(
        grid=sdf.grid, s_in=s_in, s_out=s_out, s_inel=s_inel, s_el_in=s_el_in,
        integrals={
            "s_in": float(wts @ s_in),
            "s_out": float(wts @ s_out),
            "s_inel": float(wts @ s_inel),
            "s_el_in": float(wts @ s_el_in),
        },
        tail=lorentzian_tail(sdf.pulse, sdf.grid),
    )
    if check:
        scale = max(1.0, float(np.max(s_out)))
        if res.decomposition_residual() > 1e-10 * scale:
            raise NumericalError("spectrum decomposition s_out = s_in + s_inel + s_el_in violated")
        if min(s_in.min(), s_out.min(), s_inel.min()) < -1e-14 * scale:
            raise NumericalError("negative spectral density")
    return res
