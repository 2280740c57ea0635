"""YAML run configuration: parsing, defaults and validation."""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .dynamics import FrequencyGrid, SolverOptions, covering_grid
from .errors import ConfigError
from .model import PulseSpec, SystemParams, resonances

__all__ = ["RunConfig", "GridConfig", "RunSection", "AnalysisConfig", "load_config", "parse_config"]

UNITS = "kappa=1"

# flat top-level shortcuts -> (section, key)
_FLAT = {
    "g": ("system", "g"),
    "delta_a": ("system", "delta_a"),
    "gamma0": ("pulse", "gamma0"),
    "omega0": ("pulse", "omega0"),
    "t0": ("pulse", "t0"),
    "photons": ("pulse", "photons"),
    "t_end": ("run", "t_end"),
}

_SECTIONS = {
    "system": {"g", "delta_a", "kappa"},
    "pulse": {"gamma0", "omega0", "t0", "photons"},
    "grid": {"n", "span", "span_in_gamma0", "center"},
    "run": {"t_end", "output_dt", "output_times", "snapshot_times", "rtol", "atol", "max_step"},
    "analysis": {"gamma_reg", "n_modes", "omega0_scan"},
}

_LABELS = {"E1+": ("e1_plus",), "E1-": ("e1_minus",), "E2+": ("e2_plus",), "E2-": ("e2_minus",)}
_G_MULTIPLE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*g\s*$")


@dataclass(frozen=True)
class GridConfig:
    n: int = 100
    span_in_gamma0: float | None = 25.0
    span: float | str | None = None
    center: float | str = "omega0"


@dataclass(frozen=True)
class RunSection:
    t_end: float = 60.0
    output_dt: float | None = 0.25
    output_times: tuple | None = None
    snapshot_times: tuple = ()
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf


@dataclass(frozen=True)
class AnalysisConfig:
    gamma_reg: float | None = None
    n_modes: int = 5
    omega0_scan: dict | None = None


@dataclass
class RunConfig:
    """Fully resolved configuration.

    ``resolved`` is a plain dict of every setting after defaults and
    symbolic values were resolved; it is embedded in output headers.
    """

    system: SystemParams
    pulse: PulseSpec
    grid: GridConfig
    run: RunSection
    analysis: AnalysisConfig
    grid_obj: FrequencyGrid
    resolved: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(rtol=self.run.rtol, atol=self.run.atol, max_step=self.run.max_step)

    def output_times(self):
        import numpy as np

        if self.run.output_times is not None:
            return np.asarray(self.run.output_times, float)
        steps = int(round(self.run.t_end / self.run.output_dt))
        return np.linspace(0.0, steps * self.run.output_dt, steps + 1)

    def scan_values(self):
        """Carrier frequencies of the omega0 scan (``None`` if not configured)."""
        import numpy as np

        scan = self.analysis.omega0_scan
        if scan is None:
            return None
        return np.linspace(scan["start"], scan["stop"], scan["n"])

    def with_snapshot_times(self, times) -> "RunConfig":
        from dataclasses import replace

        run = replace(self.run, snapshot_times=tuple(float(t) for t in times))
        for t in run.snapshot_times:
            if not 0.0 <= t <= run.t_end:
                raise ConfigError(f"run.snapshot_times: {t} outside [0, t_end]")
        resolved = dict(self.resolved)
        resolved["run"] = dict(resolved["run"], snapshot_times=list(run.snapshot_times))
        return replace(self, run=run, resolved=resolved)


def _number(key, value, positive=False, nonneg=False, allow_inf=False):
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ConfigError(f"{key}: must be finite")
    if positive and not x > 0:
        raise ConfigError(f"{key}: must be > 0")
    if nonneg and x < 0:
        raise ConfigError(f"{key}: must be ≥ 0")
    return x


def _integer(key, value, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key}: must be ≥ {minimum}")
    return int(value)


def _frequency(key, value, params: SystemParams, omega0=None):
    """Numbers, resonance labels (``E1+`` ...), ``omega0`` or multiples of ``g``."""
    if isinstance(value, str):
        label = value.strip()
        if label in _LABELS:
            return float(getattr(resonances(params), _LABELS[label][0]).real)
        if label == "omega0" and omega0 is not None:
            return float(omega0)
        m = _G_MULTIPLE.match(label)
        if m:
            coef = m.group(1)
            factor = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            return factor * params.g
        raise ConfigError(f"{key}: cannot interpret {value!r} as a frequency")
    return _number(key, value)


def _times(key, value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{key}: expected a list of times")
    return tuple(_number(f"{key}[{i}]", v, nonneg=True) for i, v in enumerate(value))


def _sections(raw: dict) -> dict:
    data = {name: {} for name in _SECTIONS}
    for key, value in raw.items():
        if key == "units":
            continue
        if key in _SECTIONS:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a mapping")
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                data[key][sub] = v
        elif key in _FLAT:
            sec, sub = _FLAT[key]
            if sub in data[sec]:
                raise ConfigError(f"{key}: given both at top level and in section {sec}")
            data[sec][sub] = value
        else:
            raise ConfigError(f"{key}: unknown key")
    return data


def parse_config(raw, source: str | None = None) -> RunConfig:
    """Validate a mapping (already parsed from YAML) into a :class:`RunConfig`."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    units = raw.get("units", UNITS)
    if str(units).replace(" ", "") != UNITS:
        raise ConfigError(f'units: must be "{UNITS}", got {units!r}')
    data = _sections(raw)

    sysd = data["system"]
    if "g" not in sysd:
        raise ConfigError("system.g: required key missing")
    if "kappa" in sysd and _number("system.kappa", sysd["kappa"]) != 1.0:
        raise ConfigError("system.kappa: frequencies are in units of kappa, so kappa must be 1")
    params = SystemParams(
        g=_number("system.g", sysd["g"]),
        delta_a=_number("system.delta_a", sysd.get("delta_a", 0.0)),
    )

    pd = data["pulse"]
    if "gamma0" not in pd:
        raise ConfigError("pulse.gamma0: required key missing")
    gamma0 = _number("pulse.gamma0", pd["gamma0"])
    omega0 = _frequency("pulse.omega0", pd.get("omega0", 0.0), params)
    photons = pd.get("photons", 2)
    if photons not in (1, 2) or isinstance(photons, bool):
        raise ConfigError("pulse.photons: must be 1 or 2")
    pulse = PulseSpec(gamma0=gamma0, omega0=omega0,
                      t0=_number("pulse.t0", pd.get("t0", 0.0), nonneg=True),
                      photon_count=int(photons))

    gd = data["grid"]
    n = _integer("grid.n", gd.get("n", 100), 2)
    span_raw = gd.get("span")
    if span_raw is not None and gd.get("span_in_gamma0") is not None:
        raise ConfigError("grid.span: give either span or span_in_gamma0, not both")
    center = _frequency("grid.center", gd.get("center", "omega0"), params, omega0)
    if span_raw == "cover":
        grid_obj = covering_grid(params, pulse, n)
        center = grid_obj.center
        span_in_gamma0 = None
    elif span_raw is not None:
        grid_obj = FrequencyGrid(center, _number("grid.span", span_raw, positive=True), n)
        span_in_gamma0 = None
    else:
        span_in_gamma0 = _number("grid.span_in_gamma0", gd.get("span_in_gamma0", 25.0), positive=True)
        grid_obj = FrequencyGrid(center, span_in_gamma0 * gamma0, n)
    grid = GridConfig(n=n, span_in_gamma0=span_in_gamma0,
                      span=span_raw if span_raw == "cover" else grid_obj.span, center=center)

    rd = data["run"]
    t_end = _number("run.t_end", rd.get("t_end", 60.0), positive=True)
    if not t_end > pulse.t0:
        raise ConfigError("run.t_end: must exceed pulse.t0")
    output_times = None
    output_dt = None
    if "output_times" in rd:
        if "output_dt" in rd:
            raise ConfigError("run.output_times: give either output_times or output_dt, not both")
        output_times = _times("run.output_times", rd["output_times"])
        if any(b <= a for a, b in zip(output_times, output_times[1:])):
            raise ConfigError("run.output_times: must be strictly increasing")
        if output_times[-1] > t_end:
            raise ConfigError("run.output_times: must not exceed t_end")
    else:
        output_dt = _number("run.output_dt", rd.get("output_dt", 0.25), positive=True)
        if output_dt > t_end:
            raise ConfigError("run.output_dt: must not exceed t_end")
    snaps = _times("run.snapshot_times", rd.get("snapshot_times", []))
    for t in snaps:
        if t > t_end:
            raise ConfigError(f"run.snapshot_times: {t} outside [0, t_end]")
    run = RunSection(
        t_end=t_end, output_dt=output_dt, output_times=output_times, snapshot_times=snaps,
        rtol=_number("run.rtol", rd.get("rtol", 1e-8), positive=True),
        atol=_number("run.atol", rd.get("atol", 1e-10), positive=True),
        max_step=_number("run.max_step", rd.get("max_step", math.inf), positive=True, allow_inf=True),
    )

    ad = data["analysis"]
    gamma_reg = ad.get("gamma_reg")
    if gamma_reg is not None:
        gamma_reg = _number("analysis.gamma_reg", gamma_reg, positive=True)
    scan = ad.get("omega0_scan")
    if scan is not None:
        if not isinstance(scan, dict) or set(scan) - {"start", "stop", "n"}:
            raise ConfigError("analysis.omega0_scan: expected a mapping with start, stop, n")
        scan = {
            "start": _frequency("analysis.omega0_scan.start", scan.get("start", "-3g"), params),
            "stop": _frequency("analysis.omega0_scan.stop", scan.get("stop", "3g"), params),
            "n": _integer("analysis.omega0_scan.n", scan.get("n", 61), 2),
        }
        if not scan["stop"] > scan["start"]:
            raise ConfigError("analysis.omega0_scan.stop: must exceed start")
    analysis = AnalysisConfig(gamma_reg=gamma_reg,
                              n_modes=_integer("analysis.n_modes", ad.get("n_modes", 5), 1),
                              omega0_scan=scan)

    resolved = {
        "units": UNITS,
        "system": {"g": params.g, "kappa": params.kappa, "delta_a": params.delta_a},
        "pulse": {"gamma0": pulse.gamma0, "omega0": pulse.omega0, "t0": pulse.t0,
                  "photons": pulse.photon_count},
        "grid": {"n": grid_obj.n, "center": grid_obj.center, "span": grid_obj.span},
        "run": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(run).items()},
        "analysis": asdict(analysis),
    }
    if math.isinf(resolved["run"]["max_step"]):
        resolved["run"]["max_step"] = "inf"
    return RunConfig(params, pulse, grid, run, analysis, grid_obj, resolved, source)


def load_config(path) -> RunConfig:
    """Read and validate a YAML configuration file.

    Raises
    ------
    ConfigError
        If the file cannot be read or parsed, or a key is missing or invalid.
        Physics invariant violations (e.g. ``g < 0``) keep the model's message.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return parse_config(raw, str(path))
