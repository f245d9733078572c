"""Command-line front end.

One subcommand per pipeline stage: verify, dispersion, walk-sim, gfactor,
scan, optimize, phase, sidereal, bound.  Values may come from flags or a
YAML config file (flags win); every run emits a JSON report echoing the
fully resolved configuration, so a report's config block reproduces the run
byte-for-byte.  Angles are radians everywhere; no degree mode exists.

Exit codes: 0 success, 2 configuration error, 3 numerical-invariant
failure, 4 non-convergence.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

import bccwalk
from bccwalk import constants, plots
from bccwalk.geometry import Orientation, PhysicalContext
from bccwalk.hamiltonian import build_eigensystem  # noqa: F401  (re-exported surface)
from bccwalk.io import (
    ConfigError,
    REPORT_SCHEMA,
    load_config_file,
    report_json,
    resolve_layout,
    write_dispersion_csv,
    write_json,
    write_scan_csv,
    write_sidereal_csv,
    write_trajectory_csv,
)
from bccwalk.scan import NonConvergenceError, bound_estimate, grid_scan, optimize_orientation, sidereal_series
from bccwalk.verification import run_verification
from bccwalk.walk import (
    WalkParameters,
    exact_dispersion,
    lattice_step,
    make_gaussian_packet,
    packet_dispersion_velocity,
    walk_eigensystem,
)
from bccwalk.geometry import layout_g_factor, relative_phase

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_NONCONVERGENCE = 4

OUTDIR_ENV = "BCCWALK_OUTDIR"

COMMANDS = ("verify", "dispersion", "walk-sim", "gfactor", "scan", "optimize",
            "phase", "sidereal", "bound")


@dataclass
class RunConfig:
    """Fully resolved run configuration; unset command-specific fields stay None."""

    command: str
    # physical context (neutron interferometer defaults)
    mass: float = constants.NEUTRON_MASS
    momentum: float = constants.THERMAL_NEUTRON_MOMENTUM
    arm_length: float = constants.DEFAULT_ARM_LENGTH
    dx: float = 1.0
    light_speed: float = constants.SPEED_OF_LIGHT
    hbar: float = constants.HBAR
    # geometry / state
    layout: str = "fig1"
    orientation: tuple = (0.0, 0.0, 0.0)
    spin: tuple = (0.7071067811865476 + 0j, 0.7071067811865476 + 0j)
    # scans
    grid: tuple = (48, 48, 48)
    workers: int = 1
    max_evals: int = 10_000
    start: tuple | None = None  # optimize: starting orientation (None: coarse-grid seed)
    # dispersion sweep
    direction: tuple = (1.0, 1.0, 1.0)
    theta: float = 0.2
    kappa_max: float = 0.5
    samples: int = 64
    # lattice walk
    grid_size: int = 64
    width: float = 6.0
    kappa0: tuple = (0.3, 0.0, 0.0)
    steps: int = 12
    walk_spin: str = "branch+"
    dump_state: str | None = None
    # sidereal
    earth_axis: tuple = (0.0, 0.0, 1.0)
    period: float = constants.SIDEREAL_DAY
    duration: float | None = None
    dt: float | None = None
    # bounds
    sensitivity: float | None = None
    g_assumed: float = 0.1
    # bookkeeping
    seed: int = 20240901
    output: str | None = None
    report: str | None = None
    figures: bool = True
    outdir: str | None = None

    def physical_context(self) -> PhysicalContext:
        return PhysicalContext(mass=self.mass, momentum=self.momentum,
                               arm_length=self.arm_length, dx=self.dx,
                               c=self.light_speed, hbar=self.hbar)

    def orientation_value(self) -> Orientation:
        return Orientation(*self.orientation)

    def echo(self) -> dict:
        data = asdict(self)
        data["spin"] = [[z.real, z.imag] for z in self.spin]
        for key in ("orientation", "grid", "direction", "kappa0", "earth_axis"):
            data[key] = list(data[key])
        if data["start"] is not None:
            data["start"] = list(data["start"])
        return data


def _parse_floats(text, n, what):
    parts = str(text).split(",") if isinstance(text, str) else list(text)
    if len(parts) != n:
        raise ConfigError(f"{what}: expected {n} comma-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}")


def _parse_ints(text, n, what):
    vals = _parse_floats(text, n, what)
    out = tuple(int(round(v)) for v in vals)
    if any(abs(o - v) > 0 for o, v in zip(out, vals)):
        raise ConfigError(f"{what}: expected integers, got {text!r}")
    return out


def _parse_complex_pair(value, what="spin"):
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigError(f"{what}: expected two components, got {value!r}")
    out = []
    for p in parts:
        if isinstance(p, (list, tuple)) and len(p) == 2:
            out.append(complex(float(p[0]), float(p[1])))
        else:
            try:
                out.append(complex(str(p).strip().replace("i", "j")))
            except ValueError as exc:
                raise ConfigError(f"{what}: cannot parse component {p!r}: {exc}")
    norm = sum(abs(z) ** 2 for z in out) ** 0.5
    if norm == 0:
        raise ConfigError(f"{what}: zero vector")
    return tuple(z / norm for z in out)


_FIELD_PARSERS = {
    "orientation": lambda v: _parse_floats(v, 3, "orientation"),
    "direction": lambda v: _parse_floats(v, 3, "direction"),
    "kappa0": lambda v: _parse_floats(v, 3, "kappa0"),
    "earth_axis": lambda v: _parse_floats(v, 3, "earth-axis"),
    "grid": lambda v: _parse_ints(v, 3, "grid"),
    "spin": _parse_complex_pair,
    "start": lambda v: _parse_floats(v, 3, "start"),
}

_POSITIVE_FIELDS = ("mass", "momentum", "arm_length", "dx", "light_speed", "hbar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bccwalk",
        description="discrete-spacetime quantum walk: dispersion, energy shifts, "
                    "and interferometer phase predictions (all angles in radians)",
    )
    parser.add_argument("--version", action="version", version=f"bccwalk {bccwalk.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="YAML config file; flags override its values")
        p.add_argument("--output", "-o", help="primary data file (CSV or JSON)")
        p.add_argument("--report", help="write the JSON report here instead of stdout")
        p.add_argument("--outdir", help=f"directory for relative output paths (default ${OUTDIR_ENV})")
        p.add_argument("--figures", dest="figures", action="store_true", default=None,
                       help="render a PNG figure next to the data file (default)")
        p.add_argument("--no-figures", dest="figures", action="store_false", default=None)

    def add_physical(p):
        p.add_argument("--mass", type=float, help="particle mass, kg")
        p.add_argument("--momentum", type=float, help="momentum magnitude, kg m/s")
        p.add_argument("--arm-length", dest="arm_length", type=float, help="arm length L, m")
        p.add_argument("--dx", type=float, help="lattice spacing, m")
        p.add_argument("--light-speed", dest="light_speed", type=float)
        p.add_argument("--hbar", type=float)

    def add_geometry(p, spin=True):
        p.add_argument("--layout", help="builtin layout name (fig1, parallelogram) or layout file")
        p.add_argument("--orientation", help="Euler angles t1,t2,t3 in radians")
        if spin:
            p.add_argument("--spin", help="two complex coefficients in the (v1,v2) basis, e.g. '1,1'")

    p = sub.add_parser("verify", help="run the numerical-invariant battery")
    add_common(p)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("dispersion", help="eigenphase branches along a momentum direction")
    add_common(p)
    p.add_argument("--direction", help="momentum direction x,y,z (normalized)")
    p.add_argument("--theta", type=float, help="dimensionless mass m c dx / hbar")
    p.add_argument("--kappa-max", dest="kappa_max", type=float)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("walk-sim", help="position-space wave-packet run")
    add_common(p)
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--width", type=float)
    p.add_argument("--kappa0", help="packet momentum kx,ky,kz")
    p.add_argument("--theta", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--walk-spin", dest="walk_spin",
                   help="'branch+', 'branch-', or four complex components a,b,c,d")
    p.add_argument("--dump-state", dest="dump_state", help="write final state as text dump here")

    p = sub.add_parser("gfactor", help="geometric factor of a layout at one orientation")
    add_common(p)
    add_geometry(p, spin=False)

    p = sub.add_parser("scan", help="g over a full Euler-angle grid")
    add_common(p)
    p.add_argument("--layout")
    p.add_argument("--grid", help="steps per angle, e.g. 48,48,48")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("optimize", help="refine |g| from a starting orientation")
    add_common(p)
    p.add_argument("--layout")
    p.add_argument("--orientation", help="starting Euler angles (default: coarse-grid argmax)")
    p.add_argument("--max-evals", dest="max_evals", type=int)

    p = sub.add_parser("phase", help="relative interferometer phase")
    add_common(p)
    add_physical(p)
    add_geometry(p)

    p = sub.add_parser("sidereal", help="phase time series under Earth rotation")
    add_common(p)
    add_physical(p)
    add_geometry(p)
    p.add_argument("--earth-axis", dest="earth_axis", help="rotation axis x,y,z")
    p.add_argument("--duration", type=float, help="series length, s (default 2 periods)")
    p.add_argument("--dt", type=float, help="sample spacing, s (default period/128)")
    p.add_argument("--period", type=float, help="rotation period, s (default sidereal day)")

    p = sub.add_parser("bound", help="lattice-spacing bound from a phase sensitivity")
    add_common(p)
    add_physical(p)
    p.add_argument("--sensitivity", type=float, help="resolvable phase, radians")
    p.add_argument("--g", dest="g_assumed", type=float, help="assumed geometric factor")

    return parser


def parse_config(argv) -> RunConfig:
    """Resolve argv plus optional config file into a validated RunConfig."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    provided = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}

    file_values = {}
    if ns.config:
        file_values = dict(load_config_file(ns.config))
        file_command = file_values.pop("command", None)
        if file_command is not None and file_command != ns.command:
            raise ConfigError(
                f"config file is for command '{file_command}' but '{ns.command}' was requested"
            )

    valid = {f.name for f in fields(RunConfig)}
    unknown = set(file_values) - valid
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")

    merged = {**file_values, **provided}
    merged["command"] = ns.command
    for key, parse in _FIELD_PARSERS.items():
        if key in merged:
            merged[key] = parse(merged[key])
    try:
        config = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc))

    if config.outdir is None:
        config.outdir = os.environ.get(OUTDIR_ENV)
    _validate(config)
    return config


def _validate(config: RunConfig):
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    for name in _POSITIVE_FIELDS:
        if getattr(config, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    if config.command == "bound" and config.sensitivity is None:
        raise ConfigError("bound requires --sensitivity")
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if config.command in ("gfactor", "scan", "optimize", "phase", "sidereal"):
        resolve_layout(config.layout)  # existence check with a path-naming error


def _resolve_path(config: RunConfig, path):
    if path is None:
        return None
    p = Path(path)
    if not p.is_absolute() and config.outdir:
        p = Path(config.outdir) / p
    return p


# ---------------------------------------------------------------------------
# Command implementations.  Each returns (outputs, files) where outputs is
# JSON-ready and files maps role -> written path.


def _cmd_verify(config):
    checks = run_verification(seed=config.seed)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        op = c.comparison
        print(f"  {c.name}: {c.value:.3e} {op} {c.threshold:.1e}  {status}", file=sys.stderr)
    outputs = {"checks": [c.as_dict() for c in checks],
               "all_passed": all(c.passed for c in checks)}
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_json({"schema_version": "bccwalk-verify-v1", **outputs}, out)
        files["data"] = str(out)
    return outputs, files


def _cmd_dispersion(config):
    direction = np.asarray(config.direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ConfigError("direction must be nonzero")
    direction = direction / norm
    if config.samples < 2:
        raise ConfigError("samples must be >= 2")
    rows = []
    for i in range(1, config.samples + 1):
        kappa = config.kappa_max * i / config.samples
        params = WalkParameters(tuple(kappa * direction), config.theta)
        omegas = exact_dispersion(params)
        continuum = float(np.hypot(config.theta, kappa))
        rows.append((kappa, *map(float, omegas), continuum))
    deviations = [max(abs(r[1] + r[5]), abs(r[2] + r[5]), abs(r[3] - r[5]), abs(r[4] - r[5]))
                  for r in rows]
    outputs = {
        "theta": config.theta,
        "direction": [float(v) for v in direction],
        "samples": config.samples,
        "kappa_max": config.kappa_max,
        "max_deviation_from_continuum": max(deviations),
        "deviation_at_smallest_kappa": deviations[0],
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_dispersion_csv(rows, out)
        files["data"] = str(out)
        if config.figures:
            files["figure"] = plots.save_dispersion_figure(rows, config.theta,
                                                           out.with_suffix(".png"))
    return outputs, files


def _resolve_walk_spin(spec: str, params: WalkParameters):
    if spec in ("branch+", "branch-"):
        phases, vecs = walk_eigensystem(params)
        return vecs[:, 3] if spec == "branch+" else vecs[:, 0]
    parts = str(spec).split(",")
    if len(parts) != 4:
        raise ConfigError("walk-spin must be 'branch+', 'branch-', or four components")
    try:
        spin = np.array([complex(p.strip().replace("i", "j")) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"walk-spin: {exc}")
    norm = np.linalg.norm(spin)
    if norm == 0:
        raise ConfigError("walk-spin must be nonzero")
    return spin / norm


def _cmd_walk_sim(config):
    params = WalkParameters(tuple(config.kappa0), config.theta)
    spin = _resolve_walk_spin(config.walk_spin, params)
    n = config.grid_size
    state = make_gaussian_packet(n, (n // 2, n // 2, n // 2), config.width,
                                 config.kappa0, spin)
    predicted = packet_dispersion_velocity(state, config.theta)
    reference = state.position_expectation()
    rows = [(0, *reference, state.norm())]
    positions = [reference]
    for step in range(1, config.steps + 1):
        state = lattice_step(state, config.theta)
        reference = state.position_expectation(reference=positions[-1])
        positions.append(reference)
        rows.append((step, *reference, state.norm()))
    positions = np.array(positions)
    t = np.arange(config.steps + 1)
    half = (config.steps + 1) // 2
    measured = np.array([np.polyfit(t[half:], positions[half:, i], 1)[0] for i in range(3)])
    rel_dev = float(np.linalg.norm(measured - predicted)
                    / max(np.linalg.norm(predicted), 1e-15))
    outputs = {
        "grid_size": n,
        "width": config.width,
        "kappa0": list(config.kappa0),
        "theta": config.theta,
        "steps": config.steps,
        "momentum_expectation": [float(v) for v in state.momentum_expectation()],
        "measured_velocity": [float(v) for v in measured],
        "dispersion_velocity": [float(v) for v in predicted],
        "relative_deviation": rel_dev,
        "norm_drift": abs(state.norm() - 1.0),
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_trajectory_csv(rows, out)
        files["data"] = str(out)
        if config.figures:
            files["figure"] = plots.save_trajectory_figure(rows, out.with_suffix(".png"))
    dump = _resolve_path(config, config.dump_state)
    if dump:
        dump.parent.mkdir(parents=True, exist_ok=True)
        with dump.open("w") as f:
            state.dump_text(f)
        files["state_dump"] = str(dump)
    return outputs, files


def _cmd_gfactor(config):
    layout = resolve_layout(config.layout)
    g = layout_g_factor(layout, config.orientation_value())
    outputs = {"layout": layout.name, "orientation": list(config.orientation), "g": g}
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_json({"schema_version": "bccwalk-gfactor-v1", **outputs}, out)
        files["data"] = str(out)
    return outputs, files


def _cmd_scan(config):
    layout = resolve_layout(config.layout)
    result = grid_scan(layout, steps=config.grid, workers=config.workers)
    outputs = {
        "layout": layout.name,
        "grid": list(config.grid),
        "g_min": result.g_min,
        "g_max": result.g_max,
        "argmin": list(result.argmin.as_tuple()),
        "argmax": list(result.argmax.as_tuple()),
        "median_abs_g": result.median_abs_g,
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_scan_csv(result, out)
        files["data"] = str(out)
        if config.figures:
            files["figure"] = plots.save_scan_figure(result, out.with_suffix(".png"))
    return outputs, files


def _cmd_optimize(config):
    layout = resolve_layout(config.layout)
    if "orientation" in config.__dict__ and tuple(config.orientation) != (0.0, 0.0, 0.0):
        start = config.orientation_value()
    else:
        seed_scan = grid_scan(layout, steps=(16, 16, 16))
        start = (seed_scan.argmax if abs(seed_scan.g_max) >= abs(seed_scan.g_min)
                 else seed_scan.argmin)
    best, g = optimize_orientation(layout, start, max_evaluations=config.max_evals)
    outputs = {
        "layout": layout.name,
        "start": list(start.as_tuple()),
        "orientation": list(best.as_tuple()),
        "g": g,
        "abs_g": abs(g),
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_json({"schema_version": "bccwalk-optimize-v1", **outputs}, out)
        files["data"] = str(out)
    return outputs, files


def _cmd_phase(config):
    layout = resolve_layout(config.layout)
    ctx = config.physical_context()
    phi = relative_phase(layout, config.orientation_value(), ctx, config.spin)
    outputs = {
        "layout": layout.name,
        "orientation": list(config.orientation),
        "chi": ctx.chi,
        "delta_phi_radians": phi,
        "g_equivalent": phi / ctx.chi,
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_json({"schema_version": "bccwalk-phase-v1", **outputs}, out)
        files["data"] = str(out)
    return outputs, files


def _cmd_sidereal(config):
    layout = resolve_layout(config.layout)
    ctx = config.physical_context()
    period = config.period
    duration = config.duration if config.duration is not None else 2 * period
    dt = config.dt if config.dt is not None else period / 128
    series = sidereal_series(layout, config.orientation_value(), config.earth_axis,
                             duration, dt, ctx, config.spin, period=period)
    outputs = {
        "layout": layout.name,
        "period_seconds": period,
        "samples": len(series.times),
        "dominant_frequency_hz": series.dominant_frequency(),
        "fundamental_frequency_hz": 1.0 / period,
        "peak_to_peak_radians": series.peak_to_peak(),
        "periodicity_residual": series.periodicity_residual(),
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_sidereal_csv(series, out)
        files["data"] = str(out)
        if config.figures:
            files["figure"] = plots.save_sidereal_figure(series, out.with_suffix(".png"))
    return outputs, files


def _cmd_bound(config):
    ctx = config.physical_context()
    dx_bound = bound_estimate(config.sensitivity, config.g_assumed, ctx)
    outputs = {
        "sensitivity_radians": config.sensitivity,
        "g_assumed": config.g_assumed,
        "dx_bound_m": dx_bound,
        "phase_per_meter_dx": config.g_assumed * ctx.chi / ctx.dx,
    }
    files = {}
    out = _resolve_path(config, config.output)
    if out:
        write_json({"schema_version": "bccwalk-bound-v1", **outputs}, out)
        files["data"] = str(out)
    return outputs, files


_DISPATCH = {
    "verify": _cmd_verify,
    "dispersion": _cmd_dispersion,
    "walk-sim": _cmd_walk_sim,
    "gfactor": _cmd_gfactor,
    "scan": _cmd_scan,
    "optimize": _cmd_optimize,
    "phase": _cmd_phase,
    "sidereal": _cmd_sidereal,
    "bound": _cmd_bound,
}


def run(config: RunConfig) -> dict:
    """Execute a resolved configuration and assemble its report."""
    start = time.perf_counter()
    outputs, files = _DISPATCH[config.command](config)
    report = {
        "schema_version": REPORT_SCHEMA,
        "tool": {"name": "bccwalk", "version": bccwalk.__version__},
        "command": config.command,
        "config": config.echo(),
        "outputs": outputs,
        "files": files,
        "duration_seconds": time.perf_counter() - start,
    }
    return report


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        report = run(config)
    except ConfigError as exc:
        print(f"bccwalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"bccwalk: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"bccwalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report_path = _resolve_path(config, config.report)
    if report_path:
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(report_json(report) + "\n")
    else:
        print(report_json(report))

    if config.command == "verify" and not report["outputs"]["all_passed"]:
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
