"""Experiment planning: orientation scans, refinement, sidereal series, bounds.

The geometric factor g of a layout is a smooth degree-3 polynomial in the
rotated segment directions, so a dense Euler-angle grid plus simplex
refinement pins its extremes; a rigid rotation of the apparatus about the
Earth's axis turns the lattice-frame anisotropy into a time series that is
periodic with the sidereal day and carries harmonics up to third order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from bccwalk import constants
from bccwalk.geometry import (
    Layout,
    Orientation,
    PhysicalContext,
    layout_g_factor,
    layout_g_factor_grid,
    relative_phase,
    rotation_about_axis,
    rotation_matrix,
)


class NonConvergenceError(RuntimeError):
    """The orientation refinement hit its evaluation cap before going stationary."""


@dataclass(frozen=True)
class ScanResult:
    """g over a full [0, 2pi)^3 Euler grid, row-major in (t1, t2, t3)."""

    steps: tuple
    angles: tuple          # three 1-d arrays
    g_values: np.ndarray   # shape == steps
    g_min: float
    g_max: float
    argmin: Orientation
    argmax: Orientation
    median_abs_g: float

    def rows(self):
        """Iterate (t1, t2, t3, g) in deterministic row-major order."""
        a1, a2, a3 = self.angles
        for i, t1 in enumerate(a1):
            for j, t2 in enumerate(a2):
                for k, t3 in enumerate(a3):
                    yield (float(t1), float(t2), float(t3), float(self.g_values[i, j, k]))


def _euler_rotation_stack(angles1, angles2, angles3) -> np.ndarray:
    def rx_stack(a):
        c, s = np.cos(a), np.sin(a)
        out = np.zeros((len(a), 3, 3))
        out[:, 0, 0] = 1
        out[:, 1, 1] = c
        out[:, 1, 2] = -s
        out[:, 2, 1] = s
        out[:, 2, 2] = c
        return out

    def rz_stack(a):
        c, s = np.cos(a), np.sin(a)
        out = np.zeros((len(a), 3, 3))
        out[:, 0, 0] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
        out[:, 1, 1] = c
        out[:, 2, 2] = 1
        return out

    r1 = rx_stack(np.asarray(angles1))
    r2 = rz_stack(np.asarray(angles2))
    r3 = rx_stack(np.asarray(angles3))
    return np.einsum("iab,jbc,kcd->ijkad", r1, r2, r3)


def grid_scan(layout: Layout, steps=(48, 48, 48), workers: int = 1) -> ScanResult:
    """Evaluate the layout g factor on a full Euler-angle grid.

    Each angle runs over [0, 2pi) with the given step count (>= 2).  The
    grid is chunked along the first angle in fixed-size blocks, so the
    result is bit-identical for any worker count.
    """
    steps = tuple(int(s) for s in steps)
    if any(s < 2 for s in steps):
        raise ValueError(f"need at least 2 steps per angle, got {steps}")
    angles = tuple(np.linspace(0.0, 2 * np.pi, s, endpoint=False) for s in steps)

    chunk = 8  # rows of angles[0] per task; fixed so output never depends on workers
    blocks = [(lo, min(lo + chunk, steps[0])) for lo in range(0, steps[0], chunk)]

    def eval_block(bounds):
        lo, hi = bounds
        rots = _euler_rotation_stack(angles[0][lo:hi], angles[1], angles[2])
        return layout_g_factor_grid(layout, rots)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(eval_block, blocks))
    else:
        parts = [eval_block(b) for b in blocks]
    g = np.concatenate(parts, axis=0)

    imin = np.unravel_index(int(np.argmin(g)), g.shape)
    imax = np.unravel_index(int(np.argmax(g)), g.shape)
    return ScanResult(
        steps=steps,
        angles=angles,
        g_values=g,
        g_min=float(g[imin]),
        g_max=float(g[imax]),
        argmin=Orientation(*(float(angles[d][imin[d]]) for d in range(3))),
        argmax=Orientation(*(float(angles[d][imax[d]]) for d in range(3))),
        median_abs_g=float(np.median(np.abs(g))),
    )


def optimize_orientation(layout: Layout, start: Orientation,
                         max_evaluations: int = 10_000):
    """Derivative-free refinement of |g| from a starting orientation.

    Nelder-Mead on the Euler angles, stationary when no simplex move of
    angular size 1e-6 rad improves |g|.  Returns (orientation, g value at
    it); |g| never drops below the start value.  Hitting the evaluation cap
    raises NonConvergenceError.
    """
    def negative_abs_g(x):
        return -abs(layout_g_factor(layout, Orientation(*x)))

    result = minimize(
        negative_abs_g,
        np.asarray(start.as_tuple(), dtype=float),
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-14, "maxfev": max_evaluations},
    )
    if not result.success:
        raise NonConvergenceError(
            f"orientation refinement did not converge within {max_evaluations} evaluations: "
            f"{result.message}"
        )
    best = Orientation(*(float(v) for v in result.x))
    return best, layout_g_factor(layout, best)


@dataclass(frozen=True)
class SiderealSeries:
    """Relative-phase samples under rigid rotation about a fixed axis."""

    times: np.ndarray      # seconds
    phases: np.ndarray     # radians
    axis: tuple
    base: Orientation
    period: float          # seconds

    def periodicity_residual(self) -> float:
        """max |phase(t) - phase(t + period)| over sample pairs one period apart."""
        dt = self.times[1] - self.times[0]
        lag = self.period / dt
        if abs(lag - round(lag)) > 1e-9:
            raise ValueError("period is not a multiple of the sample spacing")
        lag = int(round(lag))
        if lag >= len(self.phases):
            raise ValueError("series shorter than one period")
        return float(np.abs(self.phases[lag:] - self.phases[:-lag]).max())

    def dominant_frequency(self) -> float:
        """Frequency (Hz) of the largest nonzero-frequency spectral component."""
        amps = np.abs(np.fft.rfft(self.phases - self.phases.mean()))
        amps[0] = 0.0
        dt = self.times[1] - self.times[0]
        freqs = np.fft.rfftfreq(len(self.phases), d=dt)
        return float(freqs[int(np.argmax(amps))])

    def peak_to_peak(self) -> float:
        return float(self.phases.max() - self.phases.min())


def sidereal_series(layout: Layout, base: Orientation, earth_axis, duration: float,
                    dt: float, ctx: PhysicalContext, spin=(2**-0.5, 2**-0.5),
                    period: float = constants.SIDEREAL_DAY) -> SiderealSeries:
    """Relative phase vs time as the oriented apparatus rides the Earth's rotation.

    At each sample the base orientation is composed with a rotation of
    2 pi t / period about earth_axis and the relative phase re-evaluated.
    The series is periodic in `period` by construction; a nontrivial layout
    shows harmonics up to third order because g is a cubic polynomial in
    the direction components.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if duration < 2 * period:
        raise ValueError("need at least two periods for periodicity checks")
    axis = np.asarray(earth_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    base_matrix = rotation_matrix(base)
    n_samples = int(math.floor(duration / dt)) + 1
    times = np.arange(n_samples) * dt
    phases = np.empty(n_samples)
    for i, t in enumerate(times):
        rot = rotation_about_axis(axis, 2 * np.pi * t / period) @ base_matrix
        phases[i] = relative_phase(layout, rot, ctx, spin)
    return SiderealSeries(times=times, phases=phases, axis=tuple(axis), base=base,
                          period=period)


def bound_estimate(phase_sensitivity: float, g_assumed: float, ctx: PhysicalContext) -> float:
    """Lattice-spacing bound implied by a phase sensitivity (meters).

    Inverts phase = g * chi(dx): dx = sensitivity * hbar^2 / (g p m c L).
    The context's own dx plays no role here.
    """
    if phase_sensitivity <= 0:
        raise ValueError("phase sensitivity must be positive")
    if g_assumed == 0:
        raise ValueError("g_assumed must be nonzero")
    return (phase_sensitivity * ctx.hbar**2
            / (abs(g_assumed) * ctx.momentum * ctx.mass * ctx.c * ctx.arm_length))
