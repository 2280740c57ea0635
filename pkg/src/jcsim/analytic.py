"""Closed-form amplitudes from the Laplace-transform solution.

Every time convolution of the exponential drive with an exponential
propagator is done exactly (:func:`drive_convolution`), so the single
excitation amplitudes and the long-time two-photon amplitude are evaluated
to machine precision without a time grid. The transient two-photon amplitude
needs one remaining quadrature over the intermediate time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from . import kernels
from .dynamics import FrequencyGrid, OneExcState, normalized_pulse
from .errors import ConfigError, DomainError, NumericalError
from .model import (
    PulseSpec,
    SystemParams,
    phase_ratio,
    pulse_sdf,
    pulse_time_profile,
    resonances,
)

POLE_EPS = 1e-9


def _check_nondegenerate(params, res):
    if abs(res.r1) < 1e-12 * params.kappa:
        raise DomainError("single-photon resonances coincide (exceptional point 4g^2 = -delta_a_tilde^2)")


def drive_convolution(pulse: PulseSpec, energy, t: float, eps: float | None = None):
    """``int_{t0}^{t} dtau Xi(tau) exp(-i energy (t - tau))`` in closed form.

    ``energy`` may be complex and array valued. When it comes within
    ``eps`` (default ``1e-9 * gamma0``) of the drive pole the degenerate
    ``(t - t0) exp(...)`` limit is used.
    """
    energy = np.asarray(energy, dtype=complex)
    s = t - pulse.t0
    if s <= 0.0:
        return np.zeros_like(energy)
    eps = POLE_EPS * pulse.gamma0 if eps is None else eps
    xi_t = complex(pulse_time_profile(pulse, t))
    # drive(tau) = xi_t * exp(-i p (tau - t)), p = omega0 - i gamma0/2
    x = energy - pulse.pole
    xs = x * s
    small = np.abs(xs) < 1.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # |x s| < 1: (1 - exp(-i x s)) / (i x) is safe with expm1
        near = np.where(np.abs(x) < eps, s * (1.0 - 0.5j * xs),
                        -np.expm1(-1j * xs) / (1j * np.where(x == 0, 1.0, x)))
        near = xi_t * near
        # otherwise write it as a difference of two decaying exponentials
        amp0 = complex(pulse_time_profile(pulse, pulse.t0))
        far = amp0 * (np.exp(-1j * pulse.pole * s) - np.exp(-1j * energy * s)) / (1j * x)
    return np.where(small, near, far)


def one_exc_closed_form(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid, t: float,
                        normalize: bool = True) -> OneExcState:
    """Single-excitation amplitudes at time ``t``.

    ``normalize`` applies the same discrete renormalisation of the pulse as
    :func:`jcsim.dynamics.evolve`, so the two are directly comparable.
    """
    if normalize:
        pulse = normalized_pulse(pulse, grid)
    res = resonances(params)
    _check_nondegenerate(params, res)
    f, g, wa = params.f, params.g, params.omega_a
    e = np.array([res.e1_plus, res.e1_minus])
    sign = np.array([1.0, -1.0])
    conv = drive_convolution(pulse, e, t)
    a_g = -1j * f / res.r1 * np.sum(sign * (e - wa) * conv)
    a_e = -1j * f * g / res.r1 * np.sum(sign * conv)

    w = grid.points
    xi = pulse_sdf(pulse, w)
    b = xi * np.exp(-1j * w * t)
    if t > pulse.t0:
        if g == 0.0:
            lorentz = 1.0 / (w - params.omega_c_tilde)
        else:
            lorentz = (w - wa) / ((w - wa) * (w - params.omega_c_tilde) - g * g)
        b = b - 1j * f * f * lorentz * drive_convolution(pulse, w, t)
        for mu, em, cm in zip(sign, e, conv):
            num = em - wa
            if num == 0:
                continue
            b = b + 1j * f * f / res.r1 * mu * num / (w - em) * cm
    return OneExcState(complex(a_g), complex(a_e), b)


def scattered_single_sdf(params: SystemParams, pulse: PulseSpec, omega):
    """Long-time single-photon amplitude with the free phase removed."""
    return phase_ratio(params, omega) * pulse_sdf(pulse, omega)


@dataclass
class ScatteredSDF:
    """Outgoing two-photon amplitude split into elastic and inelastic parts."""

    elastic: np.ndarray
    inelastic: np.ndarray
    total: np.ndarray
    grid: FrequencyGrid
    gamma_reg: float
    pulse: PulseSpec

    def norm(self) -> float:
        wts = self.grid.weights
        return float(wts @ np.abs(self.total) ** 2 @ wts)


def scattered_pair_sdf(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid,
                       gamma_reg: float | None = None, carrier: float | None = None,
                       normalize: bool = True) -> ScatteredSDF:
    """Long-time two-photon amplitude on ``grid x grid``.

    Parameters
    ----------
    gamma_reg : float, optional
        Width in the denominator of the inelastic bracket; defaults to the
        pulse bandwidth ``gamma0`` (the value reproduced by direct time
        integration).
    carrier : float, optional
        Frequency subtracted from ``w + w'`` in that denominator; defaults to
        the two-photon carrier ``2 omega0``.
    normalize : bool
        Rescale the pulse to unit discrete norm on ``grid`` first.
    """
    gamma_reg = pulse.gamma0 if gamma_reg is None else float(gamma_reg)
    if not gamma_reg > 0:
        raise ConfigError("gamma_reg must be > 0")
    carrier = 2.0 * pulse.omega0 if carrier is None else float(carrier)
    if normalize:
        pulse = normalized_pulse(pulse, grid)
    w = grid.points
    out1 = scattered_single_sdf(params, pulse, w)
    elastic = np.outer(out1, out1)

    res = resonances(params)
    f, g = params.f, params.g
    if g == 0.0:
        inelastic = np.zeros_like(elastic)
    else:
        prefactor = 16.0 * math.pi**2 * f**4 * g**4
        xi_amp = pulse.scale * math.sqrt(pulse.gamma0 / (2.0 * math.pi))
        inelastic = kernels.inelastic(
            w, res.e1_plus, res.e1_minus, res.e2_plus, res.e2_minus,
            prefactor, carrier, gamma_reg, xi_amp, pulse.pole,
        )
        if pulse.t0 != 0.0:
            # a delayed pair picks up exp(i (w + w' - 2 omega0) t0)
            delay = np.exp(1j * (w - pulse.omega0) * pulse.t0)
            inelastic = inelastic * np.outer(delay, delay)
    return ScatteredSDF(elastic, inelastic, elastic + inelastic, grid, gamma_reg, pulse)


# --- transient two-photon amplitude ---------------------------------------
#
# Laplace domain (E = i s): the two-photon amplitude responds to the three
# driven signals Xi*B_w, Xi*A^g, Xi*A^e through rational transfer functions
#
#   H_B  = f^2 (E - w - wa) / (D_X (E - W))
#   H_Ag = 2 f^3 [(E - w - wa)(E - wc - wa) + g^2] / (D_X D_Z (E - W))
#   H_Ae = f^3 g [2 (E - w - wa) + E - 2 wc] / (D_X D_Z (E - W))
#
# with D_X = (E - w - E1+)(E - w - E1-), D_Z = (E - E2+)(E - E2-), W = w + w'.
# A simple pole R / (E - lam) maps to -i R int dtau exp(-i lam (t - tau)) (.)


def _residues(numerator, poles):
    """Residues of ``numerator(E) / prod(E - pole)`` at each pole (all distinct)."""
    out = []
    for j, pj in enumerate(poles):
        den = 1.0
        for k, pk in enumerate(poles):
            if k != j:
                den = den * (pj - pk)
        out.append(numerator(pj) / den)
    return out


def transient_residues(params: SystemParams, w, wp):
    """Pole/residue lists ``{signal: [(pole, residue), ...]}`` on the pair grid.

    ``w`` varies along rows, ``wp`` along columns; poles and residues are
    broadcast to ``(w.size, wp.size)``.
    """
    res = resonances(params)
    f, g, wa, wc = params.f, params.g, params.omega_a, params.omega_c_tilde
    w = np.asarray(w, float)[:, None]
    W = w + np.asarray(wp, float)[None, :]
    shape = W.shape
    ones = np.ones(shape)
    if g == 0.0:
        # exact cancellation of the decoupled atomic factor
        px = [W, (w + wc) * ones]
        pz = [W, (w + wc) * ones, 2.0 * wc * ones]
        terms = {
            "B": list(zip(px, _residues(lambda E: f * f * ones, px))),
            "Ag": list(zip(pz, _residues(lambda E: 2.0 * f**3 * ones, pz))),
            "Ae": [],
        }
        return terms
    x_poles = [W, (w + res.e1_plus) * ones, (w + res.e1_minus) * ones]
    all_poles = x_poles + [res.e2_plus * ones, res.e2_minus * ones]
    gap = min(np.abs(all_poles[i] - all_poles[j]).min()
              for i in range(len(all_poles)) for j in range(i))
    if gap < 1e-9 * params.kappa:
        raise DomainError("coincident poles in the two-photon transfer function")
    terms = {
        "B": list(zip(x_poles, _residues(lambda E: f * f * (E - w - wa), x_poles))),
        "Ag": list(zip(all_poles, _residues(
            lambda E: 2.0 * f**3 * ((E - w - wa) * (E - wc - wa) + g * g), all_poles))),
        "Ae": list(zip(all_poles, _residues(
            lambda E: f**3 * g * (2.0 * (E - w - wa) + E - 2.0 * wc), all_poles))),
    }
    return terms


def _one_exc_at(params, pulse, res, w, tau):
    f, g, wa = params.f, params.g, params.omega_a
    e = np.array([res.e1_plus, res.e1_minus])
    sign = np.array([1.0, -1.0])
    conv = drive_convolution(pulse, e, tau)
    a_g = -1j * f / res.r1 * np.sum(sign * (e - wa) * conv)
    a_e = -1j * f * g / res.r1 * np.sum(sign * conv)
    return a_g, a_e, _b_closed(params, pulse, res, w, tau)


def _b_closed(params, pulse, res, w, t):
    f, g, wa = params.f, params.g, params.omega_a
    xi = pulse_sdf(pulse, w)
    b = xi * np.exp(-1j * w * t)
    if t <= pulse.t0:
        return b
    if g == 0.0:
        lorentz = 1.0 / (w - params.omega_c_tilde)
    else:
        lorentz = (w - wa) / ((w - wa) * (w - params.omega_c_tilde) - g * g)
    b = b - 1j * f * f * lorentz * drive_convolution(pulse, w, t)
    for mu, em in ((1.0, res.e1_plus), (-1.0, res.e1_minus)):
        num = em - wa
        if num == 0:
            continue
        b = b + 1j * f * f / res.r1 * mu * num / (w - em) * drive_convolution(pulse, em, t)
    return b


def two_exc_transient(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid, t: float,
                      normalize: bool = True, epsabs: float = 1e-12,
                      epsrel: float = 1e-9) -> np.ndarray:
    """Two-photon amplitude at time ``t`` from the Laplace-domain solution.

    The response to each driven signal is expanded in simple poles; the
    remaining convolutions over the intermediate time are integrated with
    adaptive vector quadrature on ``[t0, t]``, using the closed-form
    single-excitation amplitudes inside the integrand.

    Raises
    ------
    NumericalError
        If the adaptive quadrature does not reach the requested tolerance.
    """
    if normalize:
        pulse = normalized_pulse(pulse, grid)
    res = resonances(params)
    _check_nondegenerate(params, res)
    w = grid.points
    xi = pulse_sdf(pulse, w)
    base = np.outer(xi, xi) * np.exp(-1j * (w[:, None] + w[None, :]) * t)
    if t <= pulse.t0:
        return base
    terms = transient_residues(params, w, w)

    def integrand(tau):
        drive = complex(pulse_time_profile(pulse, tau))
        a_g, a_e, b = _one_exc_at(params, pulse, res, w, tau)
        acc = np.zeros((w.size, w.size), complex)
        for pole, r in terms["B"]:
            acc += r * np.exp(-1j * pole * (t - tau)) * b[:, None]
        for pole, r in terms["Ag"]:
            acc += r * np.exp(-1j * pole * (t - tau)) * a_g
        for pole, r in terms["Ae"]:
            acc += r * np.exp(-1j * pole * (t - tau)) * a_e
        return drive * acc

    ups, err, info = quad_vec(integrand, pulse.t0, t, epsabs=epsabs, epsrel=epsrel,
                              norm="max", full_output=True)
    if not info.success:
        bad = np.unravel_index(np.argmax(np.abs(ups)), ups.shape)
        raise NumericalError(
            f"transient quadrature did not converge (error {err:.3g}) near "
            f"w = {w[bad[0]]:.4g}, w' = {w[bad[1]]:.4g}"
        )
    return base - 1j * (ups + ups.T)
