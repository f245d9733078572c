"""Exact 4x4 complex spinor algebra.

Builds the four mutually anticommuting generators of the walk (the three
shift-difference operators and the coin-flip operator, in the Weyl
representation) and provides the small-matrix functions everything else
relies on: Kronecker products, Hermitian eigendecomposition with a fixed
gauge, and the unitary matrix exponential/logarithm pair used as the
effective-Hamiltonian oracle.

Matrix functions go through eigendecompositions rather than series: for
Hermitian/unitary 4x4 input that is exact up to roundoff and needs no
truncation-order choices.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_4 = np.eye(4, dtype=complex)

HERMITICITY_TOL = 1e-10
BRANCH_CUT_TOL = 1e-6


class BranchCutError(ValueError):
    """A unitary has an eigenphase too close to +-pi for a principal log."""


def max_abs(m) -> float:
    """Entrywise max-modulus norm, the tolerance currency of this package."""
    return float(np.abs(m).max())


def kron2(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices, row-major block convention.

    result[2i+k, 2j+l] = a[i, j] * b[k, l]: the first factor indexes the
    2x2 blocks, the second indexes within each block.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"kron2 expects 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)


@dataclass(frozen=True)
class OperatorSet:
    """The four mutually anticommuting generators of the walk.

    dpx, dpy, dpz are the shift-difference operators (projector difference
    P+ - P- along each axis) and q is the coin-flip generator.  Each is
    Hermitian, unitary and traceless, squares to the identity, and
    anticommutes with the other three.
    """

    dpx: np.ndarray
    dpy: np.ndarray
    dpz: np.ndarray
    q: np.ndarray

    def members(self):
        return (self.dpx, self.dpy, self.dpz, self.q)

    def shift_generators(self):
        return (self.dpx, self.dpy, self.dpz)


def build_operator_set() -> OperatorSet:
    """Weyl-representation generators: dp_i = -sigma_Z (x) sigma_i, q = -sigma_X (x) I."""
    return OperatorSet(
        dpx=-kron2(SIGMA_Z, SIGMA_X),
        dpy=-kron2(SIGMA_Z, SIGMA_Y),
        dpz=-kron2(SIGMA_Z, SIGMA_Z),
        q=-kron2(SIGMA_X, IDENTITY_2),
    )


def _require_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    dev = max_abs(m - m.conj().T)
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max |M - M^dag| = {dev:.3e} > {tol:.1e}")
    return m


def hermitian_eig(m):
    """Eigendecomposition of a Hermitian matrix with a deterministic gauge.

    Returns (eigenvalues ascending, eigenvectors as columns).  Each
    eigenvector is rephased so its largest-magnitude component is real and
    positive, which makes numeric-vs-closed-form comparisons reproducible.
    Rejects non-Hermitian input with the offending residual norm.
    """
    m = _require_hermitian(m)
    vals, vecs = np.linalg.eigh(m)
    for i in range(vecs.shape[1]):
        j = int(np.argmax(np.abs(vecs[:, i])))
        phase = vecs[j, i] / abs(vecs[j, i])
        vecs[:, i] = vecs[:, i] / phase
    return vals, vecs


def unitary_exp(h) -> np.ndarray:
    """exp(-iH) for Hermitian H, via eigendecomposition."""
    vals, vecs = np.linalg.eigh(_require_hermitian(h))
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def unitary_log(u) -> np.ndarray:
    """Principal Hermitian logarithm: H with U = exp(-iH), spec(H) in (-pi, pi).

    Uses a complex Schur decomposition, which stays orthonormal on the
    degenerate eigenvalue pairs every walk unitary has.  Eigenphases within
    BRANCH_CUT_TOL of +-pi are rejected: there the principal branch is
    ambiguous.
    """
    u = np.asarray(u, dtype=complex)
    dev = max_abs(u @ u.conj().T - np.eye(u.shape[0]))
    if dev > 1e-10:
        raise ValueError(f"matrix is not unitary: max |U U^dag - I| = {dev:.3e}")
    t, z = schur(u, output="complex")
    phases = -np.angle(np.diag(t))
    if np.any(np.pi - np.abs(phases) < BRANCH_CUT_TOL):
        raise BranchCutError(
            "eigenphase within {:.0e} of +-pi; principal logarithm is ambiguous".format(BRANCH_CUT_TOL)
        )
    h = (z * phases) @ z.conj().T
    return 0.5 * (h + h.conj().T)
