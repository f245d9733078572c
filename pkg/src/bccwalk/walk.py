"""The discrete-time walk itself.

Momentum-space side: the step unitary for one walk step at dimensionless
momentum kappa = k*dx and coin angle theta = m*c*dx/hbar, and its exact
eigenphase dispersion.  Position-space side: a periodic cubic-grid walker
(coin rotation followed by spin-conditioned shifts along z, y, x) used to
cross-validate the momentum machinery.  One full step moves amplitude along
body diagonals, which is where the BCC structure lives; no two-sublattice
bookkeeping is needed.

Momentum convention: a plane wave with label kappa has site amplitudes
proportional to exp(-i kappa.x), so the +1 shift eigenspace picks up
exp(+i kappa) per step and a packet on an eigenphase branch omega(kappa)
travels at -grad omega.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from bccwalk import constants
from bccwalk.spinor import build_operator_set, max_abs, unitary_exp

_OPS = build_operator_set()

NORM_TOL = 1e-10


@dataclass(frozen=True)
class WalkParameters:
    """Dimensionless walk inputs: kappa = k*dx (3-vector), theta = m*c*dx/hbar.

    Each kappa component must lie in [-pi, pi] and theta must be
    nonnegative.  Instances built from physical quantities keep them for
    bookkeeping; the dynamics only ever sees (kappa, theta).
    """

    kappa: tuple
    theta: float
    physical: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        kappa = tuple(float(k) for k in self.kappa)
        if len(kappa) != 3:
            raise ValueError("kappa must be a 3-vector")
        if any(abs(k) > np.pi + 1e-15 for k in kappa):
            raise ValueError(f"kappa components must satisfy |kappa_i| <= pi, got {kappa}")
        if self.theta < 0:
            raise ValueError(f"theta must be nonnegative, got {self.theta}")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "theta", float(self.theta))
        if self.physical is not None:
            self._check_physical()

    def _check_physical(self):
        ph = self.physical
        kappa_mag = ph["momentum"] * ph["dx"] / ph["hbar"]
        theta = ph["mass"] * ph["c"] * ph["dx"] / ph["hbar"]
        if abs(theta - self.theta) > 1e-12 * max(theta, 1e-300):
            raise ValueError("theta inconsistent with physical block")
        if abs(np.linalg.norm(self.kappa) - kappa_mag) > 1e-12 * max(kappa_mag, 1e-300):
            raise ValueError("|kappa| inconsistent with physical block")

    @classmethod
    def from_physical(cls, mass, momentum, direction, dx,
                      c=constants.SPEED_OF_LIGHT, hbar=constants.HBAR):
        """kappa = (p*dx/hbar) * unit(direction), theta = m*c*dx/hbar."""
        direction = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise ValueError("direction must be nonzero")
        kappa = (momentum * dx / hbar) * direction / norm
        theta = mass * c * dx / hbar
        return cls(kappa=tuple(kappa), theta=theta,
                   physical={"mass": mass, "momentum": momentum, "c": c,
                             "hbar": hbar, "dx": dx})

    @property
    def kappa_vec(self) -> np.ndarray:
        return np.asarray(self.kappa, dtype=float)


def step_unitary(params: WalkParameters) -> np.ndarray:
    """One walk step in momentum space.

    U = exp(i kx dpx) exp(i ky dpy) exp(i kz dpz) exp(-i theta q); the coin
    acts first, then the z, y, x shift factors.
    """
    kx, ky, kz = params.kappa
    u = unitary_exp(-kx * _OPS.dpx)           # unitary_exp(h) = e^{-ih}
    u = u @ unitary_exp(-ky * _OPS.dpy)
    u = u @ unitary_exp(-kz * _OPS.dpz)
    u = u @ unitary_exp(params.theta * _OPS.q)
    return u


def walk_eigensystem(params: WalkParameters):
    """Eigenphases (ascending, in (-pi, pi]) and matching orthonormal eigenvectors.

    Uses a complex Schur decomposition so the columns stay orthonormal on
    the walk's doubly degenerate eigenphase pairs.
    """
    t, z = schur(step_unitary(params), output="complex")
    phases = -np.angle(np.diag(t))
    phases[phases <= -np.pi] += 2 * np.pi
    order = np.argsort(phases, kind="stable")
    return phases[order], z[:, order]


def exact_dispersion(params: WalkParameters) -> np.ndarray:
    """The four eigenphases omega*dt of the step unitary, sorted ascending.

    U = sum_i exp(-i omega_i dt) |v_i><v_i|; in the continuum regime the
    branches approach the doubly degenerate pair +-sqrt(theta^2 + kappa^2)
    with an O((kappa+theta)^2) remainder.
    """
    phases, _ = walk_eigensystem(params)
    return phases


# ---------------------------------------------------------------------------
# Position-space walker


@dataclass
class LatticeState:
    """Spinor field on a periodic N^3 grid: amplitudes[x, y, z, component]."""

    grid_size: int
    amplitudes: np.ndarray
    step_count: int = 0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def check_norm(self, tol: float = NORM_TOL):
        dev = abs(self.norm() - 1.0)
        if dev > tol:
            raise ValueError(f"state norm deviates from 1 by {dev:.3e}")

    def momentum_amplitudes(self) -> np.ndarray:
        """Amplitudes on the momentum grid (same shape), one spinor per grid kappa."""
        tilde = np.fft.ifftn(self.amplitudes, axes=(0, 1, 2))
        tilde *= self.grid_size ** 1.5
        return tilde

    def momentum_grid(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.grid_size)

    def momentum_expectation(self) -> np.ndarray:
        """Probability-weighted mean kappa, componentwise over the momentum grid."""
        prob = np.sum(np.abs(self.momentum_amplitudes()) ** 2, axis=3)
        prob = prob / prob.sum()
        kgrid = self.momentum_grid()
        return np.array([
            float(np.sum(prob.sum(axis=(1, 2)) * kgrid)),
            float(np.sum(prob.sum(axis=(0, 2)) * kgrid)),
            float(np.sum(prob.sum(axis=(0, 1)) * kgrid)),
        ])

    def position_expectation(self, reference=None) -> np.ndarray:
        """Mean position with minimum-image unwrapping about `reference`.

        The reference (default: grid center) anchors the branch choice on
        the periodic grid; pass the previous mean while tracking a moving
        packet.
        """
        n = self.grid_size
        if reference is None:
            reference = np.array([n / 2] * 3, dtype=float)
        prob = np.sum(np.abs(self.amplitudes) ** 2, axis=3)
        prob = prob / prob.sum()
        x = np.arange(n)
        out = np.zeros(3)
        for ax in range(3):
            marginal = prob.sum(axis=tuple(a for a in range(3) if a != ax))
            rel = (x - reference[ax] + n / 2) % n - n / 2
            out[ax] = float(np.sum(marginal * rel)) + reference[ax]
        return out

    def dump_text(self, stream):
        """Debug dump: one line per site, 'i j k' then re/im of the 4 components.

        Not a stability-guaranteed format.
        """
        n = self.grid_size
        stream.write(f"# lattice_state grid_size={n} step_count={self.step_count}\n")
        stream.write("# i j k re0 im0 re1 im1 re2 im2 re3 im3\n")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    a = self.amplitudes[i, j, k]
                    fields = " ".join(f"{v:.17g}" for comp in a for v in (comp.real, comp.imag))
                    stream.write(f"{i} {j} {k} {fields}\n")


def plane_wave(grid_size: int, kappa, spin) -> LatticeState:
    """Normalized momentum eigenstate: amplitudes exp(-i kappa.x) * spin / N^(3/2)."""
    n = grid_size
    spin = np.asarray(spin, dtype=complex)
    x = np.arange(n)
    kx, ky, kz = kappa
    phase = np.exp(-1j * (kx * x[:, None, None] + ky * x[None, :, None] + kz * x[None, None, :]))
    amps = phase[..., None] * spin[None, None, None, :]
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return LatticeState(grid_size=n, amplitudes=amps)


def make_gaussian_packet(grid_size: int, center, width: float, kappa0, spin) -> LatticeState:
    """Gaussian-envelope plane wave, exp(-|x-center|^2 / width^2) * exp(-i kappa0.x) * spin.

    The momentum-space spread is sigma_kappa = 1/width exactly.  Requires
    width >= 2 (momentum support inside the Brillouin zone) and
    grid_size >= 8*width (negligible envelope wraparound); a wider packet
    on the same grid would alias.
    """
    n = grid_size
    if width < 2:
        raise ValueError(f"width must be >= 2 sites, got {width}")
    if n < 8 * width:
        raise ValueError(f"grid too small for packet: need grid_size >= 8*width = {8 * width}, got {n}")
    spin = np.asarray(spin, dtype=complex)
    if abs(np.linalg.norm(spin) - 1.0) > 1e-8:
        raise ValueError("spin must be a unit 4-vector")
    x = np.arange(n)
    envelopes = []
    for ax in range(3):
        d = (x - center[ax] + n // 2) % n - n // 2
        envelopes.append(np.exp(-d.astype(float) ** 2 / width**2))
    env = envelopes[0][:, None, None] * envelopes[1][None, :, None] * envelopes[2][None, None, :]
    kx, ky, kz = kappa0
    phase = np.exp(-1j * (kx * x[:, None, None] + ky * x[None, :, None] + kz * x[None, None, :]))
    amps = (env * phase)[..., None] * spin[None, None, None, :]
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return LatticeState(grid_size=n, amplitudes=amps)


def _apply_sitewise(matrix: np.ndarray, amps: np.ndarray) -> np.ndarray:
    return np.einsum("ab,xyzb->xyza", matrix, amps)


def lattice_step(state: LatticeState, theta: float) -> LatticeState:
    """One walk step on the grid: coin exp(-i theta q), then shifts along z, y, x.

    Per axis, the +1 eigenspace of the shift-difference operator moves one
    site up and the -1 eigenspace one site down, with periodic wraparound.
    Norm is conserved to roundoff.
    """
    amps = _apply_sitewise(unitary_exp(theta * _OPS.q), state.amplitudes)
    for axis, dp in ((2, _OPS.dpz), (1, _OPS.dpy), (0, _OPS.dpx)):
        plus = _apply_sitewise((np.eye(4) + dp) / 2, amps)
        minus = _apply_sitewise((np.eye(4) - dp) / 2, amps)
        amps = np.roll(plus, 1, axis=axis) + np.roll(minus, -1, axis=axis)
    return LatticeState(grid_size=state.grid_size, amplitudes=amps,
                        step_count=state.step_count + 1)


def packet_group_velocity(initial: LatticeState, theta: float, steps: int):
    """Measured packet velocity in sites/step, from lattice evolution.

    Least-squares slope of the unwrap-tracked position expectation over the
    last half of the trajectory (the early half carries interference
    transients between co-occupied branches).  Requires steps < N/4 so the
    packet cannot wrap into itself; accuracy further needs the co-occupied
    branch splitting to beat faster than the fit window.
    """
    n = initial.grid_size
    if steps >= n / 4:
        raise ValueError(f"steps must stay below N/4 = {n / 4} to avoid wraparound")
    if steps < 4:
        raise ValueError("need at least 4 steps for a slope fit")
    state = initial
    reference = state.position_expectation()
    positions = [reference]
    for _ in range(steps):
        state = lattice_step(state, theta)
        reference = state.position_expectation(reference=positions[-1])
        positions.append(reference)
    positions = np.array(positions)
    spread = _packet_rms_radius(state)
    if spread > n / 4:
        raise ValueError(f"packet spread {spread:.2f} sites exceeds N/4; wrapped or dispersed")
    t = np.arange(steps + 1)
    half = (steps + 1) // 2
    return np.array([np.polyfit(t[half:], positions[half:, i], 1)[0] for i in range(3)])


def _packet_rms_radius(state: LatticeState) -> float:
    n = state.grid_size
    mean = state.position_expectation()
    prob = np.sum(np.abs(state.amplitudes) ** 2, axis=3)
    prob = prob / prob.sum()
    x = np.arange(n)
    var = 0.0
    for ax in range(3):
        marginal = prob.sum(axis=tuple(a for a in range(3) if a != ax))
        rel = (x - mean[ax] + n / 2) % n - n / 2
        var += float(np.sum(marginal * rel**2))
    return np.sqrt(var)


def _branch_gradients(params: WalkParameters, delta: float = 1e-5):
    """Central-difference gradients of the four eigenphase branches.

    Branches are continued by eigenvector overlap; phases degenerate to
    within 1e-9 are treated as one cluster and share the cluster-averaged
    gradient (individual continuations are ill-defined there).
    """
    phases, vecs = walk_eigensystem(params)
    grads = np.zeros((4, 3))
    kappa = params.kappa_vec
    for i in range(3):
        offset = np.zeros(3)
        offset[i] = delta
        php, vp = walk_eigensystem(WalkParameters(tuple(kappa + offset), params.theta))
        phm, vm = walk_eigensystem(WalkParameters(tuple(kappa - offset), params.theta))
        for b in range(4):
            cluster = np.abs(phases - phases[b]) < 1e-9
            if cluster.sum() > 1:
                wp = np.abs(vp.conj().T @ vecs[:, cluster]) ** 2
                wm = np.abs(vm.conj().T @ vecs[:, cluster]) ** 2
                up = float(np.sum(php * wp.sum(axis=1)) / wp.sum())
                um = float(np.sum(phm * wm.sum(axis=1)) / wm.sum())
            else:
                up = php[int(np.argmax(np.abs(vp.conj().T @ vecs[:, b]) ** 2))]
                um = phm[int(np.argmax(np.abs(vm.conj().T @ vecs[:, b]) ** 2))]
            grads[b, i] = (up - um) / (2 * delta)
    return phases, vecs, grads


def dispersion_group_velocity(params: WalkParameters, spin) -> np.ndarray:
    """-grad omega of the branch a given spinor occupies at fixed kappa.

    The sign realizes the exp(-i kappa.x) momentum convention: such packets
    travel at minus the eigenphase gradient.
    """
    phases, vecs, grads = _branch_gradients(params)
    spin = np.asarray(spin, dtype=complex)
    overlaps = np.abs(vecs.conj().T @ spin) ** 2
    return -grads[int(np.argmax(overlaps))]


def packet_dispersion_velocity(state: LatticeState, theta: float,
                               weight_cut: float = 1e-10) -> np.ndarray:
    """Dispersion-side velocity prediction for a packet, in sites/step.

    Averages -grad omega over the packet's exact momentum density, with
    per-branch weights from projecting each grid-kappa spinor onto the walk
    eigenbasis.  Built entirely from eigenphase finite differences, so it is
    an independent check on the position-space evolution.
    """
    tilde = state.momentum_amplitudes()
    prob = np.sum(np.abs(tilde) ** 2, axis=3)
    kgrid = state.momentum_grid()
    keep = np.argwhere(prob > weight_cut * prob.max())
    total = np.zeros(3)
    weight_sum = 0.0
    for ix, iy, iz in keep:
        kappa = (kgrid[ix], kgrid[iy], kgrid[iz])
        spin = tilde[ix, iy, iz]
        weight = float(np.sum(np.abs(spin) ** 2))
        phases, vecs, grads = _branch_gradients(WalkParameters(kappa, theta))
        branch_weights = np.abs(vecs.conj().T @ (spin / np.sqrt(weight))) ** 2
        total += weight * (branch_weights @ (-grads))
        weight_sum += weight
    return total / weight_sum
