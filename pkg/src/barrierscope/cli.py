"""Command-line front end.

Subcommands: transmit, sweep, resonances, wavefunction, compare, eigen.
Potentials come from a file, an inline definition, or a builtin; options can
also be supplied through a ``key = value`` config file, with command-line
flags taking precedence.  Data files (CSV or JSON) are written atomically
and deterministically: no timestamps, a config echo in the header, numbers
at full precision.

Exit codes: 0 success, 2 config or parse error, 3 numerical failure,
4 I/O error.

Note on formulas: wavevectors are computed from the dimensionally correct
dispersion k = sqrt(2m(E-V))/hbar, i.e. k = sqrt((E-V)/(hbar^2/2m)); see the
README for why this is spelled out.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import analysis, solvers
from .errors import (
    BarrierscopeError,
    BracketingError,
    ClosedChannelError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    InvalidIncidenceError,
    PotentialParseError,
)
from .integrate import IntegrationSettings
from .potential import BUILTINS, parse_potential
from .units import ELECTRON

SCHEMA_VERSION = 1
THREADS_ENV_VAR = "BARRIERSCOPE_THREADS"

COMMANDS = ("transmit", "sweep", "resonances", "wavefunction", "compare", "eigen")


class ConfigError(BarrierscopeError, ValueError):
    """Bad or inconsistent run configuration."""


@dataclass
class RunConfig:
    command: str
    potential_source: str
    solver: str = "backward"
    method: str = "rk4"
    steps: int = 2000
    slices: int = 1000
    quad_points: int = 2001
    energy: Optional[float] = None
    emin: Optional[float] = None
    emax: Optional[float] = None
    points: Optional[int] = None
    n: Optional[int] = None
    hbar_omega: Optional[float] = None
    resolutions: tuple = (10, 20, 50, 100, 200, 500, 1000)
    output: Optional[str] = None
    format: str = "json"
    threads: int = 1

    def resolution_for(self, solver_tag):
        return {"backward": self.steps, "transfer_matrix": self.slices,
                "wkb": self.quad_points}[solver_tag]

    def echo(self):
        # output path and worker count never change the data, so leaving
        # them out keeps files byte-identical across equivalent runs
        pairs = []
        for f in fields(self):
            if f.name in ("output", "threads"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            pairs.append(f"{f.name}={value}")
        return " ".join(pairs)


def load_potential(source):
    """Resolve a potential source: ``builtin:NAME``, ``inline:SRC`` or a path.

    Inline sources may separate lines with ``;``.
    """
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        ctor = BUILTINS.get(name)
        if ctor is None:
            raise ConfigError(f"unknown builtin potential {name!r}; "
                              f"choose from {sorted(BUILTINS)}")
        return ctor()
    if source.startswith("inline:"):
        return parse_potential(source[len("inline:"):].replace(";", "\n"))
    with open(source, "r", encoding="utf-8") as fh:
        return parse_potential(fh.read())


def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


_INT_KEYS = {"steps", "slices", "quad_points", "points", "n", "threads"}
_FLOAT_KEYS = {"energy", "emin", "emax", "hbar_omega"}
_STR_KEYS = {"potential", "solver", "method", "output", "format"}


def _coerce(key, text):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key == "resolutions":
            return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad value {text!r} for config key {key!r}")
    if key in _STR_KEYS:
        return text
    raise ConfigError(f"unknown config key {key!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="barrierscope",
        description="Quantum transmission through 1D potential barriers by "
                    "backward integration, transfer matrices, and WKB.",
        epilog="Wavevectors use the dispersion k = sqrt(2m(E-V))/hbar in eV/nm "
               "units; energies are eV, positions nm. The %s environment "
               "variable supplies a default for --threads." % THREADS_ENV_VAR,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("transmit", "transmission at a single energy"),
        ("sweep", "transmission over an energy grid"),
        ("resonances", "find and refine transmission resonances"),
        ("wavefunction", "in-barrier wavefunction at a single energy"),
        ("compare", "backward vs transfer-matrix across resolutions"),
        ("eigen", "bound state of the underlying untruncated well"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--potential", help="potential file, builtin:NAME, or inline:SRC")
        cmd.add_argument("--config", help="key = value config file; flags override it")
        cmd.add_argument("--solver", choices=["backward", "tmm", "wkb"])
        cmd.add_argument("--method", choices=["rk4", "numerov"])
        cmd.add_argument("--steps", type=int, help="backward-solver step count")
        cmd.add_argument("--slices", type=int, help="transfer-matrix slab count")
        cmd.add_argument("--quad-points", type=int, dest="quad_points",
                         help="WKB quadrature sample count")
        cmd.add_argument("--energy", type=float, help="particle energy (eV)")
        cmd.add_argument("--emin", type=float, help="sweep range start (eV)")
        cmd.add_argument("--emax", type=float, help="sweep range end (eV)")
        cmd.add_argument("--points", type=int, help="sweep grid size")
        cmd.add_argument("--n", type=int, help="bound-state index (eigen)")
        cmd.add_argument("--hbar-omega", type=float, dest="hbar_omega",
                         help="harmonic spacing for resonance matching (eV)")
        cmd.add_argument("--resolutions",
                         help="comma-separated resolution list (compare)")
        cmd.add_argument("--output", help="data file to write")
        cmd.add_argument("--format", choices=["csv", "json"], help="data file format")
        cmd.add_argument("--threads", type=int, help="sweep worker threads")
    return parser


_DEFAULT_POINTS = {"sweep": 200, "resonances": 2000, "compare": 200}


def parse_args(argv=None):
    ns = build_parser().parse_args(argv)
    file_values = {}
    if ns.config:
        for key, text in _read_config_file(ns.config).items():
            file_values[key] = _coerce(key, text)

    def pick(flag_name, file_key, default):
        flag = getattr(ns, flag_name, None)
        if flag is not None:
            return flag
        if file_key in file_values:
            return file_values[file_key]
        return default

    resolutions = pick("resolutions", "resolutions", None)
    if isinstance(resolutions, str):
        resolutions = _coerce("resolutions", resolutions)

    threads = pick("threads", "threads", None)
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"bad {THREADS_ENV_VAR} value {env!r}")
        else:
            threads = 1

    potential_source = pick("potential", "potential", None)
    if potential_source is None:
        raise ConfigError("no potential given (use --potential or a config file)")

    config = RunConfig(
        command=ns.command,
        potential_source=potential_source,
        solver=pick("solver", "solver", "backward"),
        method=pick("method", "method", "rk4"),
        steps=pick("steps", "steps", 2000),
        slices=pick("slices", "slices", 1000),
        quad_points=pick("quad_points", "quad_points", 2001),
        energy=pick("energy", "energy", None),
        emin=pick("emin", "emin", None),
        emax=pick("emax", "emax", None),
        points=pick("points", "points", _DEFAULT_POINTS.get(ns.command)),
        n=pick("n", "n", None),
        hbar_omega=pick("hbar_omega", "hbar_omega", None),
        resolutions=resolutions if resolutions is not None else RunConfig.resolutions,
        output=pick("output", "output", None),
        format=pick("format", "format", "json"),
        threads=threads,
    )
    _validate(config)
    return config


def _validate(config):
    if config.command in ("transmit", "wavefunction") and config.energy is None:
        raise ConfigError(f"{config.command} needs --energy")
    if config.command in ("sweep", "resonances", "compare"):
        if config.emin is None or config.emax is None:
            raise ConfigError(f"{config.command} needs --emin and --emax")
        if not config.emax > config.emin:
            raise ConfigError("--emax must exceed --emin")
    if config.command == "eigen" and config.n is None:
        raise ConfigError("eigen needs --n")
    if config.command == "wavefunction" and config.solver == "wkb":
        raise ConfigError("the WKB solver has no wavefunction; use backward or tmm")
    if config.threads < 1:
        raise ConfigError("--threads must be >= 1")


# ---------------------------------------------------------------------------
# output helpers

def _fmt(value):
    return format(float(value), ".17g")


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".barrierscope-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def _csv_text(config, header, rows):
    lines = [f"# barrierscope v:{SCHEMA_VERSION}", f"# config: {config.echo()}", header]
    for row in rows:
        lines.append(",".join("" if cell is None else
                              (cell if isinstance(cell, str) else _fmt(cell))
                              for cell in row))
    return "\n".join(lines) + "\n"


def _json_complex(z):
    if z is None:
        return None
    return {"re": z.real, "im": z.imag}


def _json_text(config, results, diagnostics):
    config_doc = {}
    for f in fields(config):
        if f.name in ("output", "threads"):
            continue
        value = getattr(config, f.name)
        config_doc[f.name] = list(value) if isinstance(value, tuple) else value
    doc = {
        "v": SCHEMA_VERSION,
        "config": config_doc,
        "results": results,
        "diagnostics": diagnostics,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_curve_csv(path):
    """Read back a curve CSV written by this tool (skips # comment lines)."""
    energies = []
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n") for line in fh if not line.startswith("#")]
    header = rows[0].split(",")
    data = [row.split(",") for row in rows[1:] if row]
    for row in data:
        energies.append(float(row[0]))
        values.append([float(cell) if cell else math.nan for cell in row[1:]])
    return header, np.array(energies), np.array(values)


def _g6(value):
    if value is None:
        return "-"
    return format(value, ".6g")


def render_report(command, payload):
    """Fixed-width human-readable summary; numbers at 6 significant digits."""
    lines = []
    if command == "transmit":
        sol = payload
        lines.append(f"{'E (eV)':>12} {'T':>12} {'R':>12} {'T+R':>12} {'solver':>16}")
        lines.append(f"{_g6(sol.E):>12} {_g6(sol.T):>12} {_g6(sol.R):>12} "
                     f"{_g6(sol.T + sol.R):>12} {sol.solver_tag:>16}")
        if sol.flags:
            lines.append("flags: " + ", ".join(sol.flags))
    elif command == "sweep":
        curve = payload
        lines.append(f"sweep: {len(curve)} points on [{_g6(curve.energies[0])}, "
                     f"{_g6(curve.energies[-1])}] eV, solver {curve.solver_tag} "
                     f"@ {curve.resolution}")
        lines.append(f"T range: [{_g6(float(curve.T.min()))}, {_g6(float(curve.T.max()))}]")
        if curve.diagnostics:
            lines.append(f"diverged points: {len(curve.diagnostics)}")
    elif command == "resonances":
        peaks = payload
        if not peaks:
            lines.append("no resonances found")
        else:
            lines.append(f"{'n':>4} {'E_peak (eV)':>14} {'T_peak':>12} "
                         f"{'FWHM (eV)':>12} {'E_n (eV)':>12} {'dev':>10}")
            for q in peaks:
                lines.append(f"{q.n_match if q.n_match is not None else '-':>4} "
                             f"{_g6(q.E_peak):>14} {_g6(q.T_peak):>12} "
                             f"{_g6(q.fwhm):>12} {_g6(q.E_eigen):>12} "
                             f"{_g6(q.deviation):>10}")
    elif command == "wavefunction":
        sol = payload
        lines.append(f"wavefunction at E = {_g6(sol.E)} eV: T = {_g6(sol.T)}, "
                     f"{len(sol.trajectory)} samples on [0, "
                     f"{_g6(sol.trajectory.xs[-1])}] nm")
    elif command == "compare":
        table = payload
        lines.append(f"{'resolution':>12} {'max|dT| backward':>18} {'max|dT| tmm':>14}")
        for resolution, err_b, err_t in table:
            lines.append(f"{resolution:>12} {_g6(err_b):>18} {_g6(err_t):>14}")
    elif command == "eigen":
        state = payload
        lobes = len(analysis.density_peak_positions(state.xs, state.density))
        lines.append(f"bound state n={state.n}: E = {_g6(state.E)} eV, "
                     f"{lobes} density lobes, {len(state.xs)} samples")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# command implementations

def _solution_results(sol):
    return {
        "energy_eV": sol.E,
        "T": sol.T,
        "R": sol.R,
        "A": _json_complex(sol.A),
        "B": _json_complex(sol.B),
        "F": _json_complex(sol.F),
        "k_in": {"value": sol.k_in.value, "regime": sol.k_in.regime},
        "k_out": {"value": sol.k_out.value, "regime": sol.k_out.regime},
        "solver": sol.solver_tag,
        "resolution": sol.resolution,
        "flags": list(sol.flags),
    }


def _run_transmit(config, p):
    sol = solvers.solve(p, config.energy, solver=config.solver,
                        resolution=config.resolution_for(solvers.canonical_tag(config.solver)),
                        method=config.method)
    out = None
    if config.output:
        if config.format == "csv":
            out = _csv_text(config, "energy_eV,T,R", [(sol.E, sol.T, sol.R)])
        else:
            out = _json_text(config, _solution_results(sol), {})
    return sol, out


def _run_sweep(config, p):
    tag = solvers.canonical_tag(config.solver)
    curve = analysis.sweep(p, config.emin, config.emax, config.points,
                           solver=config.solver, resolution=config.resolution_for(tag),
                           method=config.method, workers=config.threads)
    out = None
    if config.output:
        if config.format == "csv":
            rows = list(zip(curve.energies, curve.T))
            out = _csv_text(config, "energy_eV,T", rows)
        else:
            results = {"energies_eV": list(curve.energies), "T": list(curve.T),
                       "solver": curve.solver_tag, "resolution": curve.resolution}
            diag = {"divergences": [list(d) for d in curve.diagnostics]}
            out = _json_text(config, results, diag)
    return curve, out


def _infer_hbar_omega(config, p):
    if config.hbar_omega is not None:
        return config.hbar_omega
    try:
        well = analysis._extended_well(p)
        xs = np.linspace(0.0, p.length, 1001)
        i0 = int(np.argmin([well(x) for x in xs]))
        x0 = xs[i0]
        d = 1e-3 * p.length
        curvature = (well(x0 + d) - 2.0 * well(x0) + well(x0 - d)) / (2.0 * d * d)
        if curvature > 0.0:
            return analysis.harmonic_omega_from_parabola(curvature)
    except BarrierscopeError:
        pass
    return None


def _run_resonances(config, p):
    tag = solvers.canonical_tag(config.solver)
    peaks = analysis.scan_resonances(p, config.emin, config.emax,
                                     coarse_points=config.points,
                                     solver=config.solver,
                                     resolution=config.resolution_for(tag),
                                     method=config.method, workers=config.threads)
    hbar_omega = _infer_hbar_omega(config, p)
    if hbar_omega is not None:
        peaks = analysis.compare_to_harmonic(peaks, hbar_omega)
    out = None
    if config.output:
        if config.format == "csv":
            rows = [(str(q.n_match) if q.n_match is not None else "",
                     q.E_peak, q.T_peak, q.fwhm, q.E_eigen, q.deviation)
                    for q in peaks]
            out = _csv_text(config, "n,energy_eV,T,fwhm_eV,E_eigen_eV,deviation", rows)
        else:
            results = {"hbar_omega_eV": hbar_omega,
                       "peaks": [{"n": q.n_match, "energy_eV": q.E_peak,
                                  "T": q.T_peak, "fwhm_eV": q.fwhm,
                                  "E_eigen_eV": q.E_eigen, "deviation": q.deviation}
                                 for q in peaks]}
            out = _json_text(config, results, {})
    return peaks, out


def _run_wavefunction(config, p):
    tag = solvers.canonical_tag(config.solver)
    if tag == solvers.BACKWARD:
        settings = IntegrationSettings(method=config.method, steps=config.steps,
                                       record_trajectory=True)
        sol = solvers.solve_backward(p, config.energy, settings)
    else:
        sol = solvers.solve_transfer_matrix(p, config.energy, config.slices,
                                            record_trajectory=True)
    if sol.trajectory is None:
        raise ClosedChannelError(
            f"no wavefunction recorded at E={config.energy} eV (closed channel)")
    dens = analysis.density_profile(sol.trajectory)
    out = None
    if config.output:
        t = sol.trajectory
        if config.format == "csv":
            rows = [(x, z.real, z.imag, d) for x, z, d in zip(t.xs, t.psi, dens)]
            out = _csv_text(config, "x_nm,re_psi,im_psi,density", rows)
        else:
            results = {"energy_eV": sol.E, "T": sol.T, "R": sol.R,
                       "x_nm": list(t.xs), "re_psi": list(np.real(t.psi)),
                       "im_psi": list(np.imag(t.psi)), "density": list(dens)}
            out = _json_text(config, results, {"flags": list(sol.flags)})
    return sol, out


def _run_compare(config, p):
    grid = np.linspace(config.emin, config.emax, config.points)
    ref_settings = IntegrationSettings(method=config.method, steps=config.steps)
    ref = np.array([solvers.solve_backward(p, float(E), ref_settings).T for E in grid])
    curves = {}
    table = []
    for resolution in config.resolutions:
        settings = IntegrationSettings(method=config.method, steps=resolution)
        back = np.array([solvers.solve_backward(p, float(E), settings).T for E in grid])
        tmm = np.array([solvers.solve_transfer_matrix(p, float(E), resolution).T
                        for E in grid])
        curves[resolution] = (back, tmm)
        table.append((resolution, float(np.max(np.abs(back - ref))),
                      float(np.max(np.abs(tmm - ref)))))
    out = None
    if config.output:
        if config.format == "csv":
            header = ["energy_eV"]
            header += [f"backward_{r}" for r in config.resolutions]
            header += [f"tmm_{r}" for r in config.resolutions]
            header += [f"backward_ref_{config.steps}"]
            rows = []
            for i, E in enumerate(grid):
                row = [E]
                row += [curves[r][0][i] for r in config.resolutions]
                row += [curves[r][1][i] for r in config.resolutions]
                row.append(ref[i])
                rows.append(tuple(row))
            out = _csv_text(config, ",".join(header), rows)
        else:
            results = {
                "energies_eV": list(grid),
                "reference": {"solver": "backward", "steps": config.steps,
                              "T": list(ref)},
                "curves": {str(r): {"backward": list(curves[r][0]),
                                    "tmm": list(curves[r][1])}
                           for r in config.resolutions},
                "max_abs_error": [{"resolution": r, "backward": eb, "tmm": et}
                                  for r, eb, et in table],
            }
            out = _json_text(config, results, {})
    return table, out


def _run_eigen(config, p):
    bracket = None
    if config.emin is not None and config.emax is not None:
        bracket = (config.emin, config.emax)
    state = analysis.shoot_eigenstate(p, config.n, E_bracket=bracket)
    out = None
    if config.output:
        if config.format == "csv":
            rows = [(x, s, 0.0, d) for x, s, d in zip(state.xs, state.psi, state.density)]
            out = _csv_text(config, "x_nm,re_psi,im_psi,density", rows)
        else:
            results = {"n": state.n, "energy_eV": state.E, "x_nm": list(state.xs),
                       "re_psi": list(state.psi), "im_psi": [0.0] * len(state.xs),
                       "density": list(state.density)}
            out = _json_text(config, results, {})
    return state, out


_RUNNERS = {
    "transmit": _run_transmit,
    "sweep": _run_sweep,
    "resonances": _run_resonances,
    "wavefunction": _run_wavefunction,
    "compare": _run_compare,
    "eigen": _run_eigen,
}


def run(config):
    """Execute a validated RunConfig; returns the process exit code."""
    p = load_potential(config.potential_source)
    payload, out_text = _RUNNERS[config.command](config, p)
    if config.output and out_text is not None:
        _atomic_write(config.output, out_text)
    print(render_report(config.command, payload))
    return 0


def main(argv=None):
    try:
        config = parse_args(argv)
        return run(config)
    except (ConfigError, PotentialParseError) as exc:
        print(f"barrierscope: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, DivergenceError, BracketingError,
            InvalidIncidenceError, ClosedChannelError, DegenerateInputError) as exc:
        print(f"barrierscope: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"barrierscope: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
