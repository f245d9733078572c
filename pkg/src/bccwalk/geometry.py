"""Interferometer geometry and phase accumulation.

An interferometer layout is two arms of equal total length L, each an
ordered list of straight segments (unit direction, fraction of L).  A wave
packet traversing a segment accumulates phase -<h1> t / hbar, which for the
equal-superposition spin state collapses to the closed form

    phase = g(p_hat) * fraction * chi,
    g(p_hat) = px py sqrt(px^2 + py^2) / p^3,
    chi = p m c L dx / hbar^2,

so the relative phase between the arms is a pure geometry factor times the
universal scale chi.  Orientations are Euler triples R_X(t1) R_Z(t2) R_X(t3),
active right-handed rotations applied to every segment direction; the
underlying lattice frame stays fixed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from bccwalk import constants
from bccwalk.hamiltonian import energy_shift
from bccwalk.walk import WalkParameters

CLOSURE_TOL = 1e-9
FRACTION_TOL = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """One straight interferometer segment: unit direction, fraction of arm length."""

    direction: tuple
    fraction: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,):
            raise ValueError("segment direction must be a 3-vector")
        norm = np.linalg.norm(d)
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"segment direction must be unit length, |d| = {norm}")
        if not 0 < self.fraction <= 1:
            raise ValueError(f"segment fraction must lie in (0, 1], got {self.fraction}")
        object.__setattr__(self, "direction", tuple(float(v) for v in d))

    @property
    def direction_vec(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)


@dataclass(frozen=True)
class Layout:
    """Two-arm interferometer: ordered segment lists for the upper and lower arm.

    Fractions along each arm must sum to 1 (both arms have total length L)
    and the arms must close: the fraction-weighted direction sums agree, so
    the arms reconnect at the second beam splitter.
    """

    arm_upper: tuple
    arm_lower: tuple
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "arm_upper", tuple(self.arm_upper))
        object.__setattr__(self, "arm_lower", tuple(self.arm_lower))
        for label, arm in (("upper", self.arm_upper), ("lower", self.arm_lower)):
            if not arm:
                raise ValueError(f"{label} arm has no segments")
            total = sum(seg.fraction for seg in arm)
            if abs(total - 1.0) > FRACTION_TOL:
                raise ValueError(f"{label} arm fractions sum to {total}, expected 1")
        residual = np.linalg.norm(self.closure_residual())
        if residual > CLOSURE_TOL:
            raise ValueError(f"arms do not close: |displacement mismatch| = {residual:.3e}")

    def closure_residual(self) -> np.ndarray:
        up = sum(seg.fraction * seg.direction_vec for seg in self.arm_upper)
        lo = sum(seg.fraction * seg.direction_vec for seg in self.arm_lower)
        return up - lo

    def reflected_y(self) -> "Layout":
        """The layout mirrored across the x-z plane."""
        def flip(arm):
            return tuple(
                Segment(direction=(s.direction[0], -s.direction[1], s.direction[2]),
                        fraction=s.fraction)
                for s in arm
            )
        return Layout(arm_upper=flip(self.arm_upper), arm_lower=flip(self.arm_lower),
                      name=self.name + "-mirrored")


@dataclass(frozen=True)
class Orientation:
    """Euler angles (radians) of the lattice-frame rotation R_X(t1) R_Z(t2) R_X(t3)."""

    theta1: float = 0.0
    theta2: float = 0.0
    theta3: float = 0.0

    def as_tuple(self):
        return (self.theta1, self.theta2, self.theta3)


def _rx(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def rotation_matrix(o: Orientation) -> np.ndarray:
    """R = R_X(t1) R_Z(t2) R_X(t3), active right-handed.

    R_X rotates y toward z, R_Z rotates x toward y.
    """
    return _rx(o.theta1) @ _rz(o.theta2) @ _rx(o.theta3)


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Active right-handed rotation by `angle` about a unit axis (Rodrigues form)."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ValueError("rotation axis must be nonzero")
    ux, uy, uz = axis / norm
    k = np.array([[0, -uz, uy], [uz, 0, -ux], [-uy, ux, 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _as_matrix(orientation) -> np.ndarray:
    if isinstance(orientation, Orientation):
        return rotation_matrix(orientation)
    m = np.asarray(orientation, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("orientation must be an Orientation or a 3x3 matrix")
    return m


@dataclass(frozen=True)
class PhysicalContext:
    """Physical inputs of a phase prediction and the scale chi they define.

    chi = p * m * c * L * dx / hbar^2 multiplies every geometric phase
    factor; it is recomputed from the fields and must be positive.
    """

    mass: float = constants.NEUTRON_MASS
    momentum: float = constants.THERMAL_NEUTRON_MOMENTUM
    arm_length: float = constants.DEFAULT_ARM_LENGTH
    dx: float = 1.0
    c: float = constants.SPEED_OF_LIGHT
    hbar: float = constants.HBAR
    chi: float = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("mass", "momentum", "arm_length", "dx", "c", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        value = chi(self.momentum, self.mass, self.c, self.arm_length, self.dx, self.hbar)
        if self.chi is not None and abs(self.chi - value) > 1e-12 * value:
            raise ValueError(f"stored chi {self.chi} inconsistent with fields ({value})")
        object.__setattr__(self, "chi", value)

    def walk_parameters(self, direction) -> WalkParameters:
        return WalkParameters.from_physical(self.mass, self.momentum, direction,
                                            self.dx, c=self.c, hbar=self.hbar)

    def theta_kappa(self):
        kappa = self.momentum * self.dx / self.hbar
        theta = self.mass * self.c * self.dx / self.hbar
        return theta, kappa


def chi(momentum, mass, c, arm_length, dx, hbar) -> float:
    """The universal phase scale p*m*c*L*dx/hbar^2 (radians)."""
    for name, v in (("momentum", momentum), ("mass", mass), ("c", c),
                    ("arm_length", arm_length), ("dx", dx), ("hbar", hbar)):
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    return momentum * mass * c * arm_length * dx / hbar**2


def g_direction(p_hat) -> float:
    """Geometric factor g = px py sqrt(px^2 + py^2) for a unit direction.

    Bounded by 0.5 in modulus, with the extremes at (+-1, +-1, 0)/sqrt(2);
    vanishes whenever px or py is zero.
    """
    p = np.asarray(p_hat, dtype=float)
    norm = np.linalg.norm(p)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be unit length, |p| = {norm}")
    return float(p[0] * p[1] * math.sqrt(p[0] ** 2 + p[1] ** 2))


def segment_phase(seg: Segment, ctx: PhysicalContext, spin=(2**-0.5, 2**-0.5)) -> float:
    """Phase a packet accumulates along one (already oriented) segment.

    -<h1> t / hbar with the energy shift evaluated at
    kappa = (p dx / hbar) * direction and the traversal time
    t = (fraction L / c) sqrt((m^2 c^2 + p^2)/p^2).  The spin is given in
    the direction's (v1, v2) basis; for the equal superposition this equals
    g_direction * fraction * chi exactly.
    """
    params = ctx.walk_parameters(seg.direction_vec)
    shift = energy_shift(params, spin)
    theta, kappa = ctx.theta_kappa()
    e0 = math.hypot(theta, kappa)
    steps = (seg.fraction * ctx.arm_length / ctx.dx) * (e0 / kappa)  # t / dt
    return -shift * steps


def _arm_phase(arm, rotation, ctx, spin) -> float:
    total = 0.0
    for seg in arm:
        rotated = Segment(direction=tuple(rotation @ seg.direction_vec),
                          fraction=seg.fraction)
        total += segment_phase(rotated, ctx, spin)
    return total


def relative_phase(layout: Layout, orientation, ctx: PhysicalContext,
                   spin=(2**-0.5, 2**-0.5)) -> float:
    """Upper-arm minus lower-arm phase with every segment rotated by the orientation."""
    r = _as_matrix(orientation)
    return _arm_phase(layout.arm_upper, r, ctx, spin) - _arm_phase(layout.arm_lower, r, ctx, spin)


def layout_g_factor(layout: Layout, orientation) -> float:
    """Layout-level geometric factor: fraction-weighted g over upper minus lower arm.

    Equals relative_phase / chi for the equal-superposition spin state.
    """
    r = _as_matrix(orientation)
    total = 0.0
    for seg in layout.arm_upper:
        total += seg.fraction * g_direction(r @ seg.direction_vec)
    for seg in layout.arm_lower:
        total -= seg.fraction * g_direction(r @ seg.direction_vec)
    return total


def layout_g_factor_grid(layout: Layout, rotations: np.ndarray) -> np.ndarray:
    """Vectorized layout_g_factor over a stack of rotation matrices (..., 3, 3)."""
    total = np.zeros(rotations.shape[:-2])
    for sign, arm in ((1.0, layout.arm_upper), (-1.0, layout.arm_lower)):
        for seg in arm:
            d = rotations @ seg.direction_vec
            g = d[..., 0] * d[..., 1] * np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)
            total += sign * seg.fraction * g
    return total


def default_fig1_layout() -> Layout:
    """The asymmetric two-segment layout: 30-degree diagonals plus verticals.

    Upper arm: 2/3 along (cos30, sin30, 0), then 1/3 along (0, -1, 0);
    lower arm mirrored across the x axis.  Fractions 2/3 and 1/3 with exactly
    vertical second segments make both arms displace by (sqrt(3)/3, 0, 0)
    and give the extreme |g| = 1/sqrt(3) = 0.57735 at identity orientation.
    """
    c30, s30 = math.sqrt(3) / 2, 0.5
    return Layout(
        arm_upper=(Segment((c30, s30, 0.0), 2 / 3), Segment((0.0, -1.0, 0.0), 1 / 3)),
        arm_lower=(Segment((c30, -s30, 0.0), 2 / 3), Segment((0.0, 1.0, 0.0), 1 / 3)),
        name="fig1-diagonal-vertical",
    )


def parallelogram_layout() -> Layout:
    """Zero-signal control: both arms use the same two segments in opposite order."""
    c30, s30 = math.sqrt(3) / 2, 0.5
    diag = Segment((c30, s30, 0.0), 2 / 3)
    flat = Segment((1.0, 0.0, 0.0), 1 / 3)
    return Layout(arm_upper=(diag, flat), arm_lower=(flat, diag), name="parallelogram")


BUILTIN_LAYOUTS = {
    "fig1": default_fig1_layout,
    "parallelogram": parallelogram_layout,
}
