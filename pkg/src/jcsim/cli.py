"""Command line interface: ``jcsim <evolve|spectrum|schmidt|validate> --config FILE``.

Outputs go to ``--out`` (default ``./jcsim_out``) as CSV tables and a JSON
summary. Every CSV starts with ``#`` comment lines carrying the code version
and the fully resolved configuration, followed by a single header row.
Complex values are written as ``*_re, *_im`` column pairs. Frequencies are
given both as ``varpi = (w - omega0)/gamma0`` and as ``omega_kappa = w/kappa``.

Config defaults (YAML, frequencies in units of kappa; ``units: kappa=1``)::

    system:   g (required), delta_a = 0
    pulse:    gamma0 (required), omega0 = 0 (number, E1+, E1-, E2+, E2-), t0 = 0, photons = 2
    grid:     n = 100, span_in_gamma0 = 25 (or span: <number> | cover), center = omega0
    run:      t_end = 60, output_dt = 0.25 (or output_times), snapshot_times = [],
              rtol = 1e-8, atol = 1e-10, max_step = inf
    analysis: gamma_reg = gamma0, n_modes = 5, omega0_scan = {start: -3g, stop: 3g, n: 61}

The keys g, delta_a, gamma0, omega0, t0, photons and t_end may also be given
at the top level. Exit status: 0 success, 2 configuration error, 3 numerical
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name, set_threads
from .analytic import scattered_pair_sdf
from .config import RunConfig, load_config
from .dynamics import CoverageWarning, FrequencyGrid, evolve
from .entanglement import schmidt_of_sdf
from .errors import ConfigError, DomainError, JCSimError, NumericalError
from .spectrum import input_spectrum, output_spectrum
from .validate import format_check, run_suite

log = logging.getLogger("jcsim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _fmt(x) -> str:
    return repr(float(x))


def _header_lines(cfg: RunConfig, command: str) -> list[str]:
    return [
        f"# jcsim {__version__} {command}",
        "# config: " + json.dumps(cfg.resolved, sort_keys=True),
    ]


def write_csv(path: Path, cfg: RunConfig, command: str, columns, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _header_lines(cfg, command):
            fh.write(line + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, cfg: RunConfig, command: str, payload: dict) -> Path:
    doc = {"jcsim_version": __version__, "command": command, "config": cfg.resolved, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _freq_columns(grid: FrequencyGrid, cfg: RunConfig):
    w = grid.points
    return (w - cfg.pulse.omega0) / cfg.pulse.gamma0, w / cfg.system.kappa


# --- subcommands ----------------------------------------------------------

def cmd_evolve(cfg: RunConfig, out: Path, echo):
    times = cfg.output_times()
    traj = evolve(cfg.system, cfg.pulse, cfg.grid_obj, cfg.run.t_end, output_times=times,
                  solver_opts=cfg.solver, snapshot_times=cfg.run.snapshot_times)
    keys = ("N_c", "P_a", "p1", "p2", "norm")
    rows = zip(times * cfg.system.kappa, *(traj[k] for k in keys))
    write_csv(out / "timeseries.csv", cfg, "evolve", ["t_kappa", *keys], rows)
    varpi, wk = _freq_columns(cfg.grid_obj, cfg)
    files = ["timeseries.csv"]
    for t, phi in sorted(traj.snapshots.items()):
        name = f"snapshot_t{t:g}.csv"
        rows = (
            (varpi[j], varpi[k], wk[j], wk[k], phi[j, k].real, phi[j, k].imag, abs(phi[j, k]) ** 2)
            for j in range(phi.shape[0]) for k in range(phi.shape[1])
        )
        write_csv(out / name, cfg, "evolve",
                  ["varpi", "varpi_p", "omega_kappa", "omega_p_kappa", "phi_re", "phi_im", "jps"], rows)
        files.append(name)
    i_peak = int(np.argmax(traj["p2"]))
    summary = {
        "files": files,
        "final": {k: float(traj[k][-1]) for k in keys},
        "peak_p2": float(traj["p2"][i_peak]),
        "peak_p2_time": float(times[i_peak]),
        "max_norm_deviation": float(np.max(np.abs(traj["norm"] - 1.0))),
        "rhs_evaluations": int(traj.nfev),
    }
    write_json(out / "summary.json", cfg, "evolve", summary)
    echo(f"evolve: {len(times)} output times, peak p2 = {summary['peak_p2']:.6g} "
         f"at t = {summary['peak_p2_time']:g}, max |norm - 1| = {summary['max_norm_deviation']:.3e}")
    return summary


def _scan(cfg: RunConfig):
    rows = []
    for omega0 in cfg.scan_values():
        pulse = replace(cfg.pulse, omega0=float(omega0))
        grid = FrequencyGrid(float(omega0), cfg.grid_obj.span, cfg.grid_obj.n)
        spec = output_spectrum(scattered_pair_sdf(cfg.system, pulse, grid, cfg.analysis.gamma_reg))
        varpi = (grid.points - omega0) / pulse.gamma0
        for j in range(grid.n):
            rows.append((omega0 / cfg.system.kappa, varpi[j], grid.points[j], spec.s_in[j],
                         spec.s_out[j], spec.s_out[j] - spec.s_in[j]))
    return rows


def cmd_spectrum(cfg: RunConfig, out: Path, echo):
    grid = cfg.grid_obj
    sdf = scattered_pair_sdf(cfg.system, cfg.pulse, grid, cfg.analysis.gamma_reg)
    spec = output_spectrum(sdf)
    varpi, wk = _freq_columns(grid, cfg)
    write_csv(out / "spectrum.csv", cfg, "spectrum",
              ["varpi", "omega_kappa", "s_in", "s_out", "s_inel", "s_el_in", "s_in_continuum"],
              zip(varpi, wk, spec.s_in, spec.s_out, spec.s_inel, spec.s_el_in,
                  input_spectrum(cfg.pulse, grid)))
    files = ["spectrum.csv"]
    if cfg.analysis.omega0_scan is not None:
        write_csv(out / "spectrum_scan.csv", cfg, "spectrum",
                  ["omega0_kappa", "varpi", "omega_kappa", "s_in", "s_out", "s_out_minus_s_in"],
                  _scan(cfg))
        files.append("spectrum_scan.csv")
    summary = {
        "files": files,
        "integrals": spec.integrals,
        "input_tail_fraction": spec.tail,
        "photon_number_error": spec.integrals["s_out"] - 2.0,
        "min_s_el_in": float(spec.s_el_in.min()),
        "gamma_reg": sdf.gamma_reg,
    }
    write_json(out / "summary.json", cfg, "spectrum", summary)
    echo(f"spectrum: integral S_out = {spec.integrals['s_out']:.6f} "
         f"(input tail outside grid {spec.tail:.3e}), min S_el-in = {summary['min_s_el_in']:.6g}")
    return summary


def cmd_schmidt(cfg: RunConfig, out: Path, echo):
    grid = cfg.grid_obj
    sdf = scattered_pair_sdf(cfg.system, cfg.pulse, grid, cfg.analysis.gamma_reg)
    res = schmidt_of_sdf(sdf, cfg.analysis.n_modes)
    write_csv(out / "schmidt_lambdas.csv", cfg, "schmidt", ["j", "lambda"],
              ((j + 1, lam) for j, lam in enumerate(res.lambdas)))
    varpi, wk = _freq_columns(grid, cfg)
    cols = ["varpi", "omega_kappa"]
    for j in range(res.modes.shape[1]):
        cols += [f"mode{j + 1}_re", f"mode{j + 1}_im"]
    rows = ([varpi[k], wk[k], *np.column_stack((res.modes[k].real, res.modes[k].imag)).ravel()]
            for k in range(grid.n))
    write_csv(out / "schmidt_modes.csv", cfg, "schmidt", cols, rows)
    summary = {
        "files": ["schmidt_lambdas.csv", "schmidt_modes.csv"],
        "entropy_bits": res.entropy,
        "lambdas": [float(x) for x in res.lambdas[: cfg.analysis.n_modes]],
        "two_photon_norm": res.norm,
    }
    write_json(out / "summary.json", cfg, "schmidt", summary)
    lead = ", ".join(f"{x:.6f}" for x in res.lambdas[: min(5, cfg.analysis.n_modes)])
    echo(f"schmidt: lambda_1 = {res.lambdas[0]:.6f}, S_vN = {res.entropy:.6f} bits; leading: {lead}")
    return summary


def cmd_validate(cfg: RunConfig, out: Path, echo):
    checks = run_suite(cfg.system, cfg.pulse, progress=lambda c: echo(format_check(c)))
    summary = {
        "checks": [
            {"name": c.name, "residual": float(c.residual), "tol": c.tol, "passed": c.passed}
            for c in checks
        ],
        "all_passed": all(c.passed for c in checks),
    }
    write_json(out / "validate.json", cfg, "validate", summary)
    n_fail = sum(not c.passed for c in checks)
    echo(f"validate: {len(checks) - n_fail}/{len(checks)} checks passed")
    if n_fail:
        raise NumericalError(f"{n_fail} validation check(s) failed")
    return summary


COMMANDS = {
    "evolve": cmd_evolve,
    "spectrum": cmd_spectrum,
    "schmidt": cmd_schmidt,
    "validate": cmd_validate,
}


def _parse_times(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid time list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcsim",
        description="Two-photon scattering on a waveguide-coupled Jaynes-Cummings system.",
        epilog=__doc__.split("\n\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"jcsim {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS), help="what to compute")
    parser.add_argument("--config", required=True, metavar="PATH", help="YAML run configuration")
    parser.add_argument("--out", default="jcsim_out", metavar="DIR", help="output directory")
    parser.add_argument("--snapshot-times", type=_parse_times, metavar="T1,T2,...",
                        help="times of two-photon amplitude snapshots (evolve), overrides the config")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output and warnings")
    return parser


def run(cfg: RunConfig, command: str, out, quiet: bool = False) -> dict:
    """Execute ``command`` for a loaded config, writing files into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    echo = (lambda msg: None) if quiet else print
    set_threads()
    return COMMANDS[command](cfg, out, echo)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"jcsim: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.snapshot_times is not None:
            cfg = cfg.with_snapshot_times(args.snapshot_times)
    except (ConfigError, DomainError) as exc:
        print(f"jcsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.debug("kernel backend: %s", backend_name())
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore", CoverageWarning)
        else:
            warnings.showwarning = _show_warning
        try:
            run(cfg, args.command, args.out, args.quiet)
        except (ConfigError, DomainError) as exc:
            print(f"jcsim: configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (NumericalError, JCSimError) as exc:
            print(f"jcsim: numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
