"""File formats: layout files, config files, delimited tables, reports.

Layout and config files are YAML (hand-editable, comments allowed); tabular
results go to comma-separated text with a schema-version comment line,
angles printed to 9 decimals and phases/g-factors in 12-significant-digit
scientific notation so identical runs produce byte-identical files.
"""

import json
import logging
from pathlib import Path

import numpy as np
import yaml

from bccwalk.geometry import BUILTIN_LAYOUTS, Layout, Segment

log = logging.getLogger("bccwalk")

SCAN_SCHEMA = "bccwalk-scan-v1"
SIDEREAL_SCHEMA = "bccwalk-sidereal-v1"
DISPERSION_SCHEMA = "bccwalk-dispersion-v1"
TRAJECTORY_SCHEMA = "bccwalk-trajectory-v1"
REPORT_SCHEMA = "bccwalk-report-v1"

DIRECTION_NORM_WARN = 1e-6


class ConfigError(ValueError):
    """Bad configuration: unknown field, malformed file, violated invariant."""


def _segments_from_spec(raw, *, where: str):
    segments = []
    for i, entry in enumerate(raw):
        try:
            direction = np.asarray(entry["direction"], dtype=float)
            fraction = float(entry["fraction"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: segment {i}: expected {{direction: [x,y,z], fraction: f}} ({exc})")
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise ConfigError(f"{where}: segment {i}: zero direction")
        if abs(norm - 1.0) > DIRECTION_NORM_WARN:
            log.warning("%s: segment %d direction off unit length by %.3e; normalizing",
                        where, i, abs(norm - 1.0))
        segments.append(Segment(direction=tuple(direction / norm), fraction=fraction))
    return tuple(segments)


def layout_from_dict(data: dict, *, where: str = "layout") -> Layout:
    """Build a validated Layout from the file schema {name, arms: [upper, lower]}."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    arms = data.get("arms")
    if isinstance(arms, dict):
        arms = [arms.get("upper"), arms.get("lower")]
    if not isinstance(arms, (list, tuple)) or len(arms) != 2 or None in arms:
        raise ConfigError(f"{where}: 'arms' must hold exactly an upper and a lower arm")
    try:
        return Layout(
            arm_upper=_segments_from_spec(arms[0], where=f"{where}: upper arm"),
            arm_lower=_segments_from_spec(arms[1], where=f"{where}: lower arm"),
            name=str(data.get("name", "custom")),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def layout_to_dict(layout: Layout) -> dict:
    return {
        "name": layout.name,
        "arms": [
            [{"direction": list(s.direction), "fraction": s.fraction} for s in arm]
            for arm in (layout.arm_upper, layout.arm_lower)
        ],
    }


def resolve_layout(spec: str) -> Layout:
    """A builtin layout name or a path to a layout file."""
    if spec in BUILTIN_LAYOUTS:
        return BUILTIN_LAYOUTS[spec]()
    path = Path(spec)
    if not path.exists():
        raise ConfigError(
            f"layout '{spec}' is neither a builtin ({', '.join(sorted(BUILTIN_LAYOUTS))}) "
            f"nor an existing file"
        )
    return load_layout(path)


def load_layout(path) -> Layout:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed layout file: {exc}") from exc
    return layout_from_dict(data, where=str(path))


def save_layout(layout: Layout, path):
    Path(path).write_text(yaml.safe_dump(layout_to_dict(layout), sort_keys=False))


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed config file: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config file must hold a mapping")
    return data


# ---------------------------------------------------------------------------
# Delimited writers.  All formats are fixed so identical inputs give
# byte-identical files.


def _open_write(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w")


def write_scan_csv(result, path):
    with _open_write(path) as f:
        f.write(f"# schema_version={SCAN_SCHEMA}\n")
        f.write("theta1,theta2,theta3,g\n")
        for t1, t2, t3, g in result.rows():
            f.write(f"{t1:.9f},{t2:.9f},{t3:.9f},{g:.11e}\n")


def write_sidereal_csv(series, path):
    with _open_write(path) as f:
        f.write(f"# schema_version={SIDEREAL_SCHEMA}\n")
        f.write("t_seconds,delta_phi_radians\n")
        for t, phi in zip(series.times, series.phases):
            f.write(f"{t:.9f},{phi:.11e}\n")


def write_dispersion_csv(rows, path):
    """rows: iterable of (kappa, omega1..omega4, continuum)."""
    with _open_write(path) as f:
        f.write(f"# schema_version={DISPERSION_SCHEMA}\n")
        f.write("kappa,omega1,omega2,omega3,omega4,continuum\n")
        for row in rows:
            kappa, *rest = row
            f.write(f"{kappa:.9f}," + ",".join(f"{v:.11e}" for v in rest) + "\n")


def write_trajectory_csv(rows, path):
    """rows: iterable of (step, x, y, z, norm)."""
    with _open_write(path) as f:
        f.write(f"# schema_version={TRAJECTORY_SCHEMA}\n")
        f.write("step,x,y,z,norm\n")
        for step, x, y, z, norm in rows:
            f.write(f"{step},{x:.11e},{y:.11e},{z:.11e},{norm:.11e}\n")


def write_json(data: dict, path):
    with _open_write(path) as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
