"""Time evolution of the one- and two-excitation amplitudes on a frequency grid.

The waveguide continuum is sampled on a uniform grid. The equations of motion
are local in frequency (the cavity loss and the incoming drive are already
integrated out), so every grid sample evolves exactly as the continuum
amplitude at that frequency would; the grid only enters through quadratures
(norms, photon numbers, spectra).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from . import kernels
from .errors import ConfigError, IntegrationError, StructuralError
from .model import PulseSpec, SystemParams, pulse_sdf, pulse_time_profile

SQRT2 = math.sqrt(2.0)


class CoverageWarning(UserWarning):
    """The frequency grid misses part of the spectrally relevant region."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid ``center - span ... center + span`` with ``n`` points."""

    center: float
    span: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError("grid n must be an integer ≥ 2")
        if not (self.span > 0 and math.isfinite(self.span)):
            raise ConfigError("grid span must be > 0")
        if not math.isfinite(self.center):
            raise ConfigError("grid center must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "span", float(self.span))
        object.__setattr__(self, "center", float(self.center))

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.center - self.span, self.center + self.span, self.n)

    @property
    def dw(self) -> float:
        return 2.0 * self.span / (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        w = np.full(self.n, self.dw)
        w[0] = w[-1] = 0.5 * self.dw
        return w

    def integrate(self, values, axis=-1):
        """Trapezoidal integral of samples along ``axis``."""
        values = np.asarray(values)
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def shifted(self, delta: float) -> "FrequencyGrid":
        return FrequencyGrid(self.center + delta, self.span, self.n)


def required_extent(params: SystemParams, pulse: PulseSpec) -> tuple[float, float]:
    """Frequency interval a dynamics grid should cover.

    Union of ``[-(g + 5 kappa), g + 5 kappa]`` and ``omega0 -/+ 25 gamma0``.
    """
    half = params.g + 5.0 * params.kappa
    lo = min(-half, pulse.omega0 - 25.0 * pulse.gamma0)
    hi = max(half, pulse.omega0 + 25.0 * pulse.gamma0)
    return lo, hi


def check_coverage(grid: FrequencyGrid, params: SystemParams, pulse: PulseSpec) -> bool:
    lo, hi = required_extent(params, pulse)
    w = grid.points
    ok = w[0] <= lo + 1e-12 and w[-1] >= hi - 1e-12
    if not ok:
        warnings.warn(
            f"grid [{w[0]:.4g}, {w[-1]:.4g}] does not cover [{lo:.4g}, {hi:.4g}] "
            "(single-photon resonances +/- 5 kappa and pulse +/- 25 gamma0)",
            CoverageWarning,
            stacklevel=3,
        )
    return ok


def make_grid(center, span, n, params=None, pulse=None) -> FrequencyGrid:
    """Build a uniform grid; warn about coverage when ``params`` and ``pulse`` are given."""
    grid = FrequencyGrid(center, span, n)
    if params is not None and pulse is not None:
        check_coverage(grid, params, pulse)
    return grid


def covering_grid(params: SystemParams, pulse: PulseSpec, n: int) -> FrequencyGrid:
    """Smallest symmetric grid around the origin satisfying the coverage rule."""
    lo, hi = required_extent(params, pulse)
    return FrequencyGrid(0.0, max(-lo, hi), n)


# --- states ---------------------------------------------------------------

@dataclass
class OneExcState:
    a_g: complex
    a_e: complex
    b: np.ndarray

    def norm(self, grid: FrequencyGrid) -> float:
        return abs(self.a_g) ** 2 + abs(self.a_e) ** 2 + float(grid.integrate(np.abs(self.b) ** 2))

    def pack(self) -> np.ndarray:
        return np.concatenate(([self.a_g, self.a_e], self.b)).astype(complex)

    @classmethod
    def unpack(cls, y, n):
        if y.shape[0] != n + 2:
            raise StructuralError(f"one-excitation vector has length {y.shape[0]}, expected {n + 2}")
        return cls(complex(y[0]), complex(y[1]), y[2:].copy())


@dataclass
class TwoExcState:
    phi: np.ndarray
    x_g: np.ndarray
    x_e: np.ndarray
    z_g: complex
    z_e: complex

    def norm(self, grid: FrequencyGrid) -> float:
        wts = grid.weights
        two = float(wts @ (np.abs(self.phi) ** 2) @ wts)
        one = float(wts @ (np.abs(self.x_g) ** 2 + np.abs(self.x_e) ** 2))
        return two + one + abs(self.z_g) ** 2 + abs(self.z_e) ** 2

    def asymmetry(self) -> float:
        """max |phi - phi^T| relative to max |phi|."""
        peak = np.abs(self.phi).max()
        return float(np.abs(self.phi - self.phi.T).max() / peak) if peak > 0 else 0.0

    def pack(self) -> np.ndarray:
        return np.concatenate(
            (self.x_g, self.x_e, [self.z_g, self.z_e], self.phi.ravel())
        ).astype(complex)

    @classmethod
    def unpack(cls, y, n):
        if y.shape[0] != n * n + 2 * n + 2:
            raise StructuralError(
                f"two-excitation vector has length {y.shape[0]}, expected {n * n + 2 * n + 2}"
            )
        return cls(
            phi=y[2 * n + 2:].reshape(n, n).copy(),
            x_g=y[:n].copy(),
            x_e=y[n:2 * n].copy(),
            z_g=complex(y[2 * n]),
            z_e=complex(y[2 * n + 1]),
        )


def normalized_pulse(pulse: PulseSpec, grid: FrequencyGrid) -> PulseSpec:
    """Rescale the pulse so that its samples have unit trapezoidal norm on ``grid``.

    The same factor multiplies the drive, so the rescaled pulse is a
    consistent (slightly stronger) input rather than a renormalised state
    with a mismatched source.
    """
    xi = pulse_sdf(pulse, grid.points)
    return pulse.rescaled(1.0 / math.sqrt(float(grid.integrate(np.abs(xi) ** 2))))


def initial_states(pulse: PulseSpec, grid: FrequencyGrid) -> tuple[OneExcState, TwoExcState]:
    """Initial amplitudes: incoming photons in the waveguide, JC system empty.

    Both states have discrete norm exactly 1 on ``grid``.
    """
    xi = pulse_sdf(normalized_pulse(pulse, grid), grid.points)
    n = grid.n
    one = OneExcState(0j, 0j, xi.astype(complex))
    two = TwoExcState(np.outer(xi, xi), np.zeros(n, complex), np.zeros(n, complex), 0j, 0j)
    return one, two


# --- right-hand sides -----------------------------------------------------

def _rhs_one_arrays(params, drive, w, a_g, a_e, b):
    f, g = params.f, params.g
    da_g = -1j * (params.omega_c_tilde * a_g + f * drive + g * a_e)
    da_e = -1j * (params.omega_a * a_e + g * a_g)
    db = -1j * (w * b + f * a_g)
    return da_g, da_e, db


def _rhs_two_arrays(params, drive, w, a_g, a_e, b, x_g, x_e, z_g, z_e, phi, dphi):
    f, g = params.f, params.g
    wc, wa = params.omega_c_tilde, params.omega_a
    dx_g = -1j * ((w + wc) * x_g + SQRT2 * f * drive * b + g * x_e + SQRT2 * f * z_g)
    dx_e = -1j * ((w + wa) * x_e + g * x_g + f * z_e)
    dz_g = -1j * (2.0 * wc * z_g + 2.0 * f * drive * a_g + SQRT2 * g * z_e)
    dz_e = -1j * ((wc + wa) * z_e + SQRT2 * f * drive * a_e + SQRT2 * g * z_g)
    kernels.phi_rhs(w, phi, x_g, f / SQRT2, dphi)
    return dx_g, dx_e, dz_g, dz_e


def rhs_one(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid, t: float,
            state: OneExcState) -> OneExcState:
    """Time derivative of the single-excitation amplitudes."""
    if state.b.shape != (grid.n,):
        raise StructuralError("state.b does not match the grid")
    drive = complex(pulse_time_profile(pulse, t))
    da_g, da_e, db = _rhs_one_arrays(params, drive, grid.points, state.a_g, state.a_e, state.b)
    return OneExcState(complex(da_g), complex(da_e), db)


def rhs_two(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid, t: float,
            one: OneExcState, two: TwoExcState) -> TwoExcState:
    """Time derivative of the two-excitation amplitudes.

    The one-excitation amplitudes ``one`` enter as sources multiplied by the
    drive; they must be evolved alongside from the same initial time.
    """
    n = grid.n
    if one.b.shape != (n,) or two.phi.shape != (n, n) or two.x_g.shape != (n,) \
            or two.x_e.shape != (n,):
        raise StructuralError("state dimensions do not match the grid")
    drive = complex(pulse_time_profile(pulse, t))
    dphi = np.empty((n, n), dtype=complex)
    dx_g, dx_e, dz_g, dz_e = _rhs_two_arrays(
        params, drive, grid.points, one.a_g, one.a_e, one.b,
        two.x_g, two.x_e, two.z_g, two.z_e, two.phi, dphi,
    )
    return TwoExcState(dphi, dx_g, dx_e, complex(dz_g), complex(dz_e))


class _FlatSystem:
    """Packed joint RHS ``y = [a_g, a_e, b, x_g, x_e, z_g, z_e, phi]``."""

    def __init__(self, params, pulse, grid, with_two):
        self.params = params
        self.pulse = pulse
        self.w = grid.points
        self.n = grid.n
        self.with_two = with_two
        self.size = self.n + 2 + (self.n * self.n + 2 * self.n + 2 if with_two else 0)
        self._dy = np.empty(self.size, dtype=complex)

    def __call__(self, t, y):
        n, w = self.n, self.w
        drive = complex(pulse_time_profile(self.pulse, t))
        dy = np.empty_like(self._dy)
        a_g, a_e, b = y[0], y[1], y[2:n + 2]
        da_g, da_e, db = _rhs_one_arrays(self.params, drive, w, a_g, a_e, b)
        dy[0], dy[1] = da_g, da_e
        dy[2:n + 2] = db
        if self.with_two:
            o = n + 2
            x_g, x_e = y[o:o + n], y[o + n:o + 2 * n]
            z_g, z_e = y[o + 2 * n], y[o + 2 * n + 1]
            phi = y[o + 2 * n + 2:].reshape(n, n)
            dphi = dy[o + 2 * n + 2:].reshape(n, n)
            dx_g, dx_e, dz_g, dz_e = _rhs_two_arrays(
                self.params, drive, w, a_g, a_e, b, x_g, x_e, z_g, z_e, phi, dphi
            )
            dy[o:o + n] = dx_g
            dy[o + n:o + 2 * n] = dx_e
            dy[o + 2 * n] = dz_g
            dy[o + 2 * n + 1] = dz_e
        return dy


# --- integration ----------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    first_step: float | None = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.max_step > 0):
            raise ConfigError("solver tolerances and max_step must be > 0")


def observables(two: TwoExcState, grid: FrequencyGrid) -> dict:
    """Cavity photon number, atomic population, excitation probabilities and norm."""
    wts = grid.weights
    xg2 = float(wts @ np.abs(two.x_g) ** 2)
    xe2 = float(wts @ np.abs(two.x_e) ** 2)
    zg2, ze2 = abs(two.z_g) ** 2, abs(two.z_e) ** 2
    return {
        "N_c": xg2 + ze2 + 2.0 * zg2,
        "P_a": xe2 + ze2,
        "p1": xg2 + xe2,
        "p2": zg2 + ze2,
        "norm": two.norm(grid),
    }


def waveguide_photon_number(two: TwoExcState, grid: FrequencyGrid) -> float:
    """Mean number of photons in the waveguide for a two-excitation state."""
    wts = grid.weights
    pair = float(wts @ (np.abs(two.phi) ** 2) @ wts)
    single = float(wts @ (np.abs(two.x_g) ** 2 + np.abs(two.x_e) ** 2))
    return 2.0 * pair + single


OBSERVABLE_KEYS = ("N_c", "P_a", "p1", "p2", "norm")


@dataclass
class Trajectory:
    """Observables (and optional snapshots) at the requested output times."""

    times: np.ndarray
    grid: FrequencyGrid
    pulse: PulseSpec
    records: dict = field(default_factory=dict)
    one: list = field(default_factory=list)
    two: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    nfev: int = 0
    final: TwoExcState | None = None
    final_one: OneExcState | None = None

    def __getitem__(self, key):
        return self.records[key]


def _output_grid(t_start, t_end, output_times):
    if output_times is None:
        times = np.linspace(t_start, t_end, 201)
    else:
        times = np.asarray(output_times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ConfigError("output_times must be a non-empty 1-D sequence")
        if np.any(np.diff(times) <= 0):
            raise ConfigError("output_times must be strictly increasing")
        if times[0] < t_start or times[-1] > t_end + 1e-12:
            raise ConfigError("output_times must lie in [0, t_end]")
    return times


def evolve(params: SystemParams, pulse: PulseSpec, grid: FrequencyGrid, t_end: float,
           output_times=None, solver_opts: SolverOptions | None = None,
           snapshot_times=(), photon_count: int | None = None,
           keep_states: bool = False) -> Trajectory:
    """Integrate the amplitudes from ``t = 0`` to ``t_end``.

    Uses the Dormand-Prince 4(5) pair with adaptive steps. Integration is
    split at the pulse arrival time (where the drive switches on) and at every
    output time, so recorded values are step endpoints rather than
    interpolants.

    Parameters
    ----------
    params, pulse, grid
        Model, incoming pulse and frequency grid. The pulse is renormalised on
        the grid (see :func:`normalized_pulse`).
    t_end : float
        Final time; must exceed the pulse arrival time.
    output_times : array_like, optional
        Strictly increasing times in ``[0, t_end]``; default 201 uniform points.
    solver_opts : SolverOptions, optional
    snapshot_times : iterable of float
        Times at which the full two-photon amplitude is stored.
    photon_count : {1, 2}, optional
        Overrides ``pulse.photon_count``; with 1 only the single-excitation
        sector is integrated.
    keep_states : bool
        Store the full state at every output time.

    Raises
    ------
    IntegrationError
        If the step size underflows or the solver reports failure.
    """
    opts = solver_opts or SolverOptions()
    photons = pulse.photon_count if photon_count is None else photon_count
    if photons not in (1, 2):
        raise ConfigError("photon_count must be 1 or 2")
    if not t_end > pulse.t0:
        raise ConfigError("t_end must be greater than the pulse arrival time t0")
    check_coverage(grid, params, pulse)

    pulse_n = normalized_pulse(pulse, grid)
    one0, two0 = initial_states(pulse, grid)
    system = _FlatSystem(params, pulse_n, grid, with_two=photons == 2)
    y = one0.pack()
    if photons == 2:
        y = np.concatenate((y, two0.pack()))

    times = _output_grid(0.0, t_end, output_times)
    snaps = sorted({float(s) for s in snapshot_times})
    for s in snaps:
        if not 0.0 <= s <= t_end:
            raise ConfigError(f"snapshot time {s} outside [0, t_end]")
    stops = sorted({*times.tolist(), *snaps, t_end, *([pulse.t0] if pulse.t0 > 0 else [])})

    traj = Trajectory(times=times, grid=grid, pulse=pulse_n,
                      records={k: np.empty(times.size) for k in (*OBSERVABLE_KEYS, "norm1")})
    n = grid.n
    want = {float(t): i for i, t in enumerate(times)}
    snap_set = set(snaps)
    t = 0.0
    h = opts.first_step
    nfev = 0

    def record(t_now, y_now):
        one = OneExcState.unpack(y_now[:n + 2], n)
        if photons == 2:
            two = TwoExcState.unpack(y_now[n + 2:], n)
            if two.asymmetry() > 1e-10:
                raise IntegrationError("two-photon amplitude lost permutation symmetry", t_now)
        else:
            two = TwoExcState(np.zeros((n, n), complex), np.zeros(n, complex),
                              np.zeros(n, complex), 0j, 0j)
        if t_now in want:
            i = want[t_now]
            obs = observables(two, grid) if photons == 2 else dict.fromkeys(OBSERVABLE_KEYS, np.nan)
            for k in OBSERVABLE_KEYS:
                traj.records[k][i] = obs[k]
            traj.records["norm1"][i] = one.norm(grid)
            traj.one.append(one)
            if keep_states and photons == 2:
                traj.two.append(two)
        if t_now in snap_set and photons == 2:
            traj.snapshots[t_now] = two.phi.copy()

    for stop in stops:
        if stop > t:
            kwargs = {"first_step": min(h, stop - t)} if h else {}
            solver = RK45(system, t, y, stop, rtol=opts.rtol, atol=opts.atol,
                          max_step=opts.max_step, vectorized=False, **kwargs)
            while solver.status == "running":
                msg = solver.step()
                if solver.status == "failed":
                    raise IntegrationError(msg or "integration step failed", solver.t)
                if solver.step_size is not None and solver.step_size > 0:
                    h = solver.step_size
            nfev += solver.nfev
            if not np.all(np.isfinite(solver.y)):
                raise IntegrationError("non-finite amplitudes", solver.t)
            t, y = stop, solver.y
        record(t, y)

    traj.nfev = nfev
    if photons == 2:
        traj.final = TwoExcState.unpack(y[n + 2:], n)
    traj.final_one = OneExcState.unpack(y[:n + 2], n)
    return traj


def phi_in_frame(phi: np.ndarray, grid: FrequencyGrid, t: float) -> np.ndarray:
    """Remove free propagation: ``phi * exp(+i (w + w') t)``."""
    ph = np.exp(1j * grid.points * t)
    return phi * np.outer(ph, ph)

