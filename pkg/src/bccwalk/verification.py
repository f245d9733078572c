"""Runtime invariant battery behind the `verify` CLI command.

Re-checks the algebraic identities the package is built on: generator
algebra, unitarity, matrix-function roundtrips, the exact second-order
matching identity, the matrix-log oracle's third-order remainder, and the
closed-form/numeric matrix-element pair.  Every check is seeded and
deterministic.
"""

from dataclasses import asdict, dataclass

import numpy as np

from bccwalk.geometry import Orientation, PhysicalContext, default_fig1_layout, layout_g_factor, relative_phase
from bccwalk.hamiltonian import (
    build_eigensystem,
    build_h0,
    build_h1,
    h1_matrix_elements_closed_form,
    h1_matrix_elements_numeric,
    oracle_effective_h,
    verify_second_order_matching,
)
from bccwalk.spinor import build_operator_set, hermitian_eig, max_abs, unitary_exp, unitary_log
from bccwalk.walk import WalkParameters, step_unitary


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">="

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold if self.comparison == "<=" else self.value >= self.threshold

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _random_hermitian(rng) -> np.ndarray:
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return (m + m.conj().T) / 2


def _random_params(rng, scale=0.3, theta_scale=None) -> WalkParameters:
    kappa = rng.uniform(-scale, scale, 3)
    theta = rng.uniform(0, scale if theta_scale is None else theta_scale)
    return WalkParameters(tuple(kappa), theta)


def run_verification(seed: int = 20240901) -> list[Check]:
    rng = np.random.default_rng(seed)
    ops = build_operator_set()
    members = ops.members()
    checks = []

    involution = max(max_abs(m @ m - np.eye(4)) for m in members)
    checks.append(Check("operator_involution", involution, 1e-14, "<="))

    anticomm = max(
        max_abs(a @ b + b @ a)
        for i, a in enumerate(members)
        for j, b in enumerate(members)
        if i < j
    )
    checks.append(Check("operator_anticommutation", anticomm, 1e-14, "<="))

    unitarity = max(
        max_abs(u @ u.conj().T - np.eye(4))
        for u in (step_unitary(_random_params(rng, scale=np.pi * 0.99)) for _ in range(100))
    )
    checks.append(Check("step_unitarity", unitarity, 1e-12, "<="))

    roundtrip = 0.0
    for _ in range(50):
        h = _random_hermitian(rng)
        h *= 0.9 * np.pi / max(np.abs(np.linalg.eigvalsh(h)).max(), 1e-12)
        roundtrip = max(roundtrip, max_abs(unitary_log(unitary_exp(h)) - h))
    checks.append(Check("exp_log_roundtrip", roundtrip, 1e-10, "<="))

    recon = 0.0
    for _ in range(100):
        h = _random_hermitian(rng)
        vals, vecs = hermitian_eig(h)
        recon = max(recon, max_abs((vecs * vals) @ vecs.conj().T - h))
    checks.append(Check("hermitian_eig_reconstruction", recon, 1e-10, "<="))

    matching = max(verify_second_order_matching(_random_params(rng)) for _ in range(100))
    checks.append(Check("second_order_matching", matching, 1e-12, "<="))

    slopes = []
    for _ in range(3):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        kappa0 = 0.1 * direction * rng.uniform(0.3, 1.0)
        theta0 = 0.1 * rng.uniform(0.3, 1.0)
        ladder = 2.0 ** -np.arange(8)
        remainders = []
        for s in ladder:
            p = WalkParameters(tuple(s * kappa0), s * theta0)
            remainders.append(max_abs(oracle_effective_h(p) - build_h0(p) - build_h1(p)))
        slopes.append(np.polyfit(np.log(ladder), np.log(remainders), 1)[0])
    checks.append(Check("oracle_remainder_slope", float(min(slopes)), 2.9, ">="))

    diag_dev = offdiag_dev = spectral_dev = block_dev = 0.0
    for _ in range(200):
        p = _random_params(rng, scale=0.5)
        if np.linalg.norm(p.kappa_vec) < 1e-2:
            continue
        numeric = h1_matrix_elements_numeric(p)
        closed = h1_matrix_elements_closed_form(p)
        diag_dev = max(diag_dev, abs(numeric["d11"] - closed["d11"]),
                       abs(numeric["d22"] - closed["d22"]))
        offdiag_dev = max(offdiag_dev, abs(abs(numeric["d12"]) - closed["d12_modulus"]))
        eig = build_eigensystem(p)
        h0 = build_h0(p)
        for v, sign in ((eig.v1, 1), (eig.v2, 1), (eig.v3, -1), (eig.v4, -1)):
            spectral_dev = max(spectral_dev, max_abs(h0 @ v - sign * eig.e0 * v))
        # degenerate-subspace check: 2x2 block eigenvalues vs projected h1
        h1 = build_h1(p)
        block = np.array([[numeric["d11"], numeric["d12"]],
                          [np.conjugate(numeric["d12"]), numeric["d22"]]])
        basis = np.column_stack([eig.v1, eig.v2])
        projected = basis.conj().T @ h1 @ basis
        block_dev = max(block_dev, max_abs(np.sort(np.linalg.eigvalsh(block))
                                           - np.sort(np.linalg.eigvalsh(projected))))
    checks.append(Check("matrix_elements_diagonal", diag_dev, 1e-12, "<="))
    checks.append(Check("matrix_elements_offdiagonal", offdiag_dev, 1e-10, "<="))
    checks.append(Check("eigensystem_spectral_residual", spectral_dev, 1e-10, "<="))
    checks.append(Check("degenerate_block_consistency", block_dev, 1e-10, "<="))

    # closed-form vs eigensystem-path phases at a cancellation-friendly context
    ctx = PhysicalContext(mass=2e-27, momentum=4e-19, arm_length=0.1, dx=1e-15)
    layout = default_fig1_layout()
    phase_dev = 0.0
    for _ in range(25):
        orientation = Orientation(*rng.uniform(0, 2 * np.pi, 3))
        g = layout_g_factor(layout, orientation)
        if abs(g) < 1e-3:
            continue
        phase = relative_phase(layout, orientation, ctx)
        phase_dev = max(phase_dev, abs(phase - g * ctx.chi) / abs(g * ctx.chi))
    checks.append(Check("phase_closed_form_crosscheck", phase_dev, 1e-12, "<="))

    return checks
