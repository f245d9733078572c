"""Effective Hamiltonian of the walk and its direction-dependent energy shifts.

Everything here is carried in dimensionless units of hbar/dt with inputs
(kappa, theta); physical unit plumbing lives in the geometry module.

Writing the step unitary as exp(-i(h0 + h1 + ...)) and expanding in powers
of (kappa, theta):

  h0 = -theta sx(x)I + sz(x)(kappa . sigma)            (Dirac generator)
  h1 = I(x)(ky kz sx - kx kz sy + kx ky sz)
       - theta sy(x)(kappa . sigma)                    (leading correction)

h1 is fixed by the exact operator identity

  (1/2) h0^2 + i h1 = (1/2)(kappa^2 + theta^2) I
                      + sum_{i<j} k_i k_j dp_i dp_j - theta (kappa . dp) q

equivalently i*h1 is the sum of half-commutators of the step factors.  The
principal matrix logarithm of the step unitary serves as an independent
oracle: the remainder after subtracting h0 + h1 is third order, and the
module's closed-form matrix elements in the positive-energy eigenbasis are
checked against direct numeric sandwiches.
"""

from dataclasses import dataclass

import numpy as np

from bccwalk.spinor import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    build_operator_set,
    kron2,
    unitary_log,
)
from bccwalk.walk import WalkParameters, step_unitary

_OPS = build_operator_set()


def _kappa_dot_sigma(kappa) -> np.ndarray:
    kx, ky, kz = kappa
    return kx * SIGMA_X + ky * SIGMA_Y + kz * SIGMA_Z


def build_h0(params: WalkParameters) -> np.ndarray:
    """Leading-order (Dirac) generator, units hbar/dt.

    -theta sx(x)I + sz(x)(kappa.sigma); eigenvalues are the doubly
    degenerate pair +-sqrt(theta^2 + kappa^2).
    """
    return (-params.theta * kron2(SIGMA_X, IDENTITY_2)
            + kron2(SIGMA_Z, _kappa_dot_sigma(params.kappa)))


def build_h1(params: WalkParameters) -> np.ndarray:
    """First correction to the generator, units hbar/dt.

    I(x)(ky kz sx - kx kz sy + kx ky sz) - theta sy(x)(kappa.sigma).
    Hermitian, traceless, and vanishing when kappa = 0.  The sign of the
    first tensor term is fixed by the matrix-log oracle (the half-commutator
    sum of the step factors), which the test suite enforces.
    """
    kx, ky, kz = params.kappa
    w = ky * kz * SIGMA_X - kx * kz * SIGMA_Y + kx * ky * SIGMA_Z
    return (kron2(IDENTITY_2, w)
            - params.theta * kron2(SIGMA_Y, _kappa_dot_sigma(params.kappa)))


def verify_second_order_matching(params: WalkParameters) -> float:
    """Max-entry residual of the exact second-order matching identity.

    Compares (1/2) h0^2 + i h1 against
    (1/2)(kappa^2 + theta^2) I + sum_{i<j} k_i k_j dp_i dp_j
    - theta (kappa.dp) q.  The identity is exact, not asymptotic, so the
    residual is pure roundoff for any input.
    """
    kx, ky, kz = params.kappa
    theta = params.theta
    h0 = build_h0(params)
    h1 = build_h1(params)
    lhs = 0.5 * h0 @ h0 + 1j * h1
    kappa_sq = kx * kx + ky * ky + kz * kz
    kdp = kx * _OPS.dpx + ky * _OPS.dpy + kz * _OPS.dpz
    rhs = (0.5 * (kappa_sq + theta**2) * np.eye(4)
           + kx * ky * _OPS.dpx @ _OPS.dpy
           + kx * kz * _OPS.dpx @ _OPS.dpz
           + ky * kz * _OPS.dpy @ _OPS.dpz
           - theta * kdp @ _OPS.q)
    return float(np.abs(lhs - rhs).max())


def oracle_effective_h(params: WalkParameters) -> np.ndarray:
    """Independent effective Hamiltonian: principal log of the step unitary.

    Returns Hermitian h with step_unitary = exp(-ih), units hbar/dt.  Valid
    whenever no walk eigenphase sits at the branch cut, guaranteed for
    kappa + theta < 1.  The difference from h0 + h1 is third order in
    (kappa, theta).
    """
    return unitary_log(step_unitary(params))


# ---------------------------------------------------------------------------
# Eigensystem of h0 and matrix elements of h1


@dataclass(frozen=True)
class Eigensystem:
    """Constructive eigenbasis of h0 at one (kappa, theta).

    v1, v2 span the +e0 eigenspace and v3, v4 the -e0 eigenspace.  The
    two-level factors are the +-1 eigenvectors phi_pm of the direction
    operator (kappa.sigma)/kappa and psi of the mass-momentum mixing
    operators -(theta/e0) sx +- (kappa/e0) sz; v1 = psi_pp (x) phi_plus,
    v2 = psi_mp (x) phi_minus, v3 = psi_pm (x) phi_plus,
    v4 = psi_mm (x) phi_minus.

    gauge records the phase convention: phi built with real first component
    and the azimuthal phase on the second, psi real.  In this gauge
    <v1|h1|v2> = -(theta/e0) sqrt(1 - kz^2/kappa^2) (kx ky - i kappa kz).
    """

    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v4: np.ndarray
    e0: float
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    gauge: str = "phi: (cos b/2, sin b/2 e^{i a}), (-sin b/2, cos b/2 e^{i a}); psi real"

    def positive_pair(self):
        return self.v1, self.v2


def build_eigensystem(params: WalkParameters) -> Eigensystem:
    """Closed-form eigenvectors of h0 with a deterministic gauge.

    Undefined at kappa = 0, where the momentum direction (and with it the
    phi eigenvectors) has no meaning.
    """
    kappa = params.kappa_vec
    kappa_mag = float(np.linalg.norm(kappa))
    if kappa_mag == 0.0:
        raise ValueError("eigensystem undefined at kappa = 0: momentum direction needed")
    theta = params.theta
    e0 = float(np.hypot(theta, kappa_mag))

    beta = np.arccos(np.clip(kappa[2] / kappa_mag, -1.0, 1.0))
    alpha = np.arctan2(kappa[1], kappa[0])
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    azim = np.exp(1j * alpha)
    phi_plus = np.array([cb, sb * azim], dtype=complex)
    phi_minus = np.array([-sb, cb * azim], dtype=complex)

    gamma = np.arctan2(theta, kappa_mag)
    cg, sg = np.cos(gamma / 2), np.sin(gamma / 2)
    psi_pp = np.array([cg, -sg], dtype=complex)   # +1 eigenvector of psi_+
    psi_pm = np.array([sg, cg], dtype=complex)    # -1 eigenvector of psi_+
    psi_mp = np.array([sg, -cg], dtype=complex)   # +1 eigenvector of psi_-
    psi_mm = np.array([cg, sg], dtype=complex)    # -1 eigenvector of psi_-

    return Eigensystem(
        v1=np.kron(psi_pp, phi_plus),
        v2=np.kron(psi_mp, phi_minus),
        v3=np.kron(psi_pm, phi_plus),
        v4=np.kron(psi_mm, phi_minus),
        e0=e0,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
    )


def h1_matrix_elements_numeric(params: WalkParameters) -> dict:
    """h1 in the positive-energy basis by direct sandwiching.

    Returns {'d11', 'd22' (real), 'd12' (complex)}; d12's phase is a gauge
    artifact of the eigensystem construction, its modulus is physical.
    """
    eig = build_eigensystem(params)
    h1 = build_h1(params)
    return {
        "d11": float((eig.v1.conj() @ h1 @ eig.v1).real),
        "d22": float((eig.v2.conj() @ h1 @ eig.v2).real),
        "d12": complex(eig.v1.conj() @ h1 @ eig.v2),
    }


def h1_matrix_elements_closed_form(params: WalkParameters) -> dict:
    """Closed forms for the positive-energy block of h1, units hbar/dt.

    d11 = +kx ky kz / kappa, d22 = -d11, and
    |d12| = sqrt(theta^2/(theta^2+kappa^2))
            * sqrt((kappa^2 - kz^2)/kappa^2) * |kx ky - i kappa kz|.

    These are the sandwiches of build_h1 in the build_eigensystem basis;
    the numeric route must reproduce them to roundoff.
    """
    kappa = params.kappa_vec
    kappa_mag = float(np.linalg.norm(kappa))
    if kappa_mag == 0.0:
        raise ValueError("matrix elements undefined at kappa = 0")
    theta = params.theta
    kx, ky, kz = kappa
    d11 = kx * ky * kz / kappa_mag
    e0 = np.hypot(theta, kappa_mag)
    transverse = np.sqrt(max(kappa_mag**2 - kz**2, 0.0)) / kappa_mag
    d12_mod = (theta / e0) * transverse * abs(kx * ky - 1j * kappa_mag * kz)
    return {"d11": d11, "d22": -d11, "d12_modulus": float(d12_mod)}


def energy_shift(params: WalkParameters, spin) -> float:
    """First-order energy shift of a positive-energy state, units hbar/dt.

    spin = (a, b) are coefficients in the (v1, v2) basis with
    |a|^2 + |b|^2 = 1; the shift is |a|^2 d11 + |b|^2 d22 + 2 Re(a* b d12).
    """
    a, b = complex(spin[0]), complex(spin[1])
    norm = abs(a) ** 2 + abs(b) ** 2
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"spin must be normalized in the (v1, v2) basis, |a|^2+|b|^2 = {norm}")
    elems = h1_matrix_elements_numeric(params)
    return float(abs(a) ** 2 * elems["d11"] + abs(b) ** 2 * elems["d22"]
                 + 2 * (a.conjugate() * b * elems["d12"]).real)
