"""Analytic-versus-numeric oracle suite run by ``jcsim validate``.

Each check compares two independent computations (closed form against time
integration, or a quantity against an exact limit) and reports the residual
next to its tolerance.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .analytic import one_exc_closed_form, scattered_pair_sdf, scattered_single_sdf, two_exc_transient
from .dynamics import (
    CoverageWarning,
    FrequencyGrid,
    covering_grid,
    evolve,
    observables,
    phi_in_frame,
    waveguide_photon_number,
)
from .entanglement import entropy, schmidt_of_sdf
from .model import PulseSpec, SystemParams, pulse_sdf, pulse_time_profile, resonances
from .spectrum import output_spectrum


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


def _rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def check_sum_rules(params, pulse):
    res = resonances(params)
    r1 = abs(res.e1_plus + res.e1_minus - (2 * params.omega_c_tilde + params.delta_a_tilde))
    r2 = abs(res.e2_plus + res.e2_minus - (4 * params.omega_c_tilde + params.delta_a_tilde))
    return Check("resonance sum rules", max(r1, r2), 1e-12)


def fourier_profile_oracle(pulse: PulseSpec, t: float) -> complex:
    """``int dw exp(-i w t) xi_w`` by QUADPACK Fourier quadrature on ``[0, inf)``.

    With ``x = w - omega0`` and ``s = t - t0`` the integrand splits into an
    even part (cosine transform) and an odd part (sine transform).
    """
    s = t - pulse.t0
    if s <= 0:
        return 0j
    amp = pulse.scale * math.sqrt(pulse.gamma0 / (2.0 * math.pi))
    h2 = 0.25 * pulse.gamma0**2
    even = quad(lambda x: -0.5 * pulse.gamma0 * amp / (x * x + h2), 0.0, np.inf,
                weight="cos", wvar=s)[0]
    odd = quad(lambda x: amp * x / (x * x + h2), 0.0, np.inf, weight="sin", wvar=s)[0]
    return np.exp(-1j * pulse.omega0 * t) * (2j * even - 2j * odd)


def check_drive_transform(params, pulse):
    worst = 0.0
    for t in pulse.t0 + np.linspace(0.2, 5.0, 6) / pulse.gamma0:
        exact = complex(pulse_time_profile(pulse, t))
        worst = max(worst, abs(fourier_profile_oracle(pulse, t) - exact) / abs(exact))
    return Check("drive time profile vs Fourier quadrature (rel)", worst, 1e-3)


def check_one_excitation(params, pulse):
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 48)
    times = np.linspace(pulse.t0, pulse.t0 + 20.0, 20)
    traj = evolve(params, pulse, grid, times[-1], output_times=times, photon_count=1)
    worst = 0.0
    for t, num in zip(times, traj.one):
        ref = one_exc_closed_form(params, pulse, grid, t)
        worst = max(worst, abs(num.a_g - ref.a_g), abs(num.a_e - ref.a_e),
                    float(np.max(np.abs(num.b - ref.b))))
    return Check("single excitation: closed form vs ODE (max abs)", worst, 1e-6)


def check_transient(params, pulse, t=2.0):
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 24)
    traj = evolve(params, pulse, grid, pulse.t0 + t, output_times=[pulse.t0 + t],
                  keep_states=True)
    num = traj.two[-1].phi
    ref = two_exc_transient(params, pulse, grid, pulse.t0 + t)
    return Check(f"two-photon transient at t={t:g}: Laplace vs ODE (rel to peak)",
                 float(np.max(np.abs(num - ref)) / np.max(np.abs(ref))), 1e-4)


def check_excitation_number(params, pulse):
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 48)
    traj = evolve(params, pulse, grid, pulse.t0 + 6.0, output_times=np.linspace(0, pulse.t0 + 6.0, 7),
                  keep_states=True)
    worst = 0.0
    for two in traj.two:
        obs = observables(two, grid)
        total = obs["N_c"] + obs["P_a"] + waveguide_photon_number(two, grid)
        worst = max(worst, abs(total - 2.0 * obs["norm"]))
    return Check("excitation number N_c + P_a + N_wg = 2 norm", worst, 1e-10)


def check_single_scattering(params, pulse):
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 48)
    t_end = pulse.t0 + 40.0 + 12.0 / pulse.gamma0
    traj = evolve(params, pulse, grid, t_end, output_times=[t_end], photon_count=1)
    b = traj.final_one.b * np.exp(1j * grid.points * t_end)
    ref = scattered_single_sdf(params, traj.pulse, grid.points)
    return Check("long-time single photon vs ODE (max abs)", float(np.max(np.abs(b - ref))), 1e-3)


def check_long_time_pair(params, pulse, n=128, t_end=60.0):
    grid = covering_grid(params, pulse, n)
    t_end = max(t_end, pulse.t0 + 12.0 / pulse.gamma0)
    traj = evolve(params, pulse, grid, t_end, output_times=[t_end])
    num = phi_in_frame(traj.final.phi, grid, t_end)
    ref = scattered_pair_sdf(params, pulse, grid).total
    return Check("long-time two-photon amplitude vs ODE (rel L2)", _rel_l2(num, ref), 2e-2)


def check_empty_cavity(params, pulse):
    empty = SystemParams(0.0, params.kappa, params.delta_a)
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 100)
    sdf = scattered_pair_sdf(empty, pulse, grid)
    spec = output_spectrum(sdf)
    r_spec = float(np.max(np.abs(spec.s_out - spec.s_in)))
    sch = schmidt_of_sdf(sdf)
    return [
        Check("g=0: S_out = S_in (max abs)", r_spec, 1e-10),
        Check("g=0: 1 - lambda_1", abs(1.0 - sch.lambdas[0]), 1e-6),
        Check("g=0: entropy (bits)", sch.entropy, 1e-3),
    ]


def check_spectrum_and_schmidt(params, pulse):
    grid = FrequencyGrid(pulse.omega0, 25 * pulse.gamma0, 100)
    sdf = scattered_pair_sdf(params, pulse, grid)
    spec = output_spectrum(sdf)
    sch = schmidt_of_sdf(sdf, n_modes=grid.n)
    modes = sch.modes
    gram = (modes.conj().T * grid.weights) @ modes
    return [
        Check("spectrum decomposition residual", spec.decomposition_residual(), 1e-10),
        Check("integral of S_out minus 2", abs(spec.integrals["s_out"] - 2.0), 3e-2),
        Check("Schmidt mode orthonormality", float(np.max(np.abs(gram - np.eye(grid.n)))), 1e-8),
        Check("Schmidt reconstruction (rel Frobenius)", _rel_l2(sch.reconstruct(), sdf.total), 1e-3),
        Check("entropy of [0.25]*4 minus 2 bits", abs(entropy([0.25] * 4) - 2.0), 1e-12),
    ]


def run_suite(params: SystemParams, pulse: PulseSpec, progress=None) -> list[Check]:
    """Run every check for the given model and pulse plus the empty-cavity limit."""
    empty_pulse = pulse
    steps = [
        lambda: check_sum_rules(params, pulse),
        lambda: check_drive_transform(params, pulse),
        lambda: check_one_excitation(params, pulse),
        lambda: check_transient(SystemParams(0.0, params.kappa, params.delta_a), empty_pulse),
        lambda: check_transient(params, pulse),
        lambda: check_excitation_number(params, pulse),
        lambda: check_single_scattering(params, pulse),
        lambda: check_long_time_pair(params, pulse),
        lambda: check_empty_cavity(params, pulse),
        lambda: check_spectrum_and_schmidt(params, pulse),
    ]
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        for step in steps:
            start = time.perf_counter()
            got = step()
            got = got if isinstance(got, list) else [got]
            elapsed = (time.perf_counter() - start) / len(got)
            for c in got:
                c.seconds = elapsed
                out.append(c)
                if progress:
                    progress(c)
    return out


def format_check(c: Check) -> str:
    mark = "PASS" if c.passed else "FAIL"
    return f"{mark}  {c.name:<58s} residual={c.residual:.3e}  tol={c.tol:.1e}"


