"""Discrete-spacetime quantum walk toolkit.

A 3D discrete-time quantum walk on the body-centered cubic lattice whose
continuum limit is Dirac evolution.  The package builds the momentum-space
step unitary, extracts the effective Hamiltonian and its leading
direction-dependent correction, and propagates those energy shifts into
phase-shift predictions for asymmetric matter interferometers: geometric
factors, orientation scans, sidereal modulation, and lattice-spacing bounds.
"""

from bccwalk.spinor import (
    OperatorSet,
    build_operator_set,
    hermitian_eig,
    kron2,
    unitary_exp,
    unitary_log,
)
from bccwalk.walk import (
    LatticeState,
    WalkParameters,
    exact_dispersion,
    lattice_step,
    make_gaussian_packet,
    packet_dispersion_velocity,
    packet_group_velocity,
    step_unitary,
)
from bccwalk.hamiltonian import (
    Eigensystem,
    build_eigensystem,
    build_h0,
    build_h1,
    energy_shift,
    h1_matrix_elements_closed_form,
    h1_matrix_elements_numeric,
    oracle_effective_h,
    verify_second_order_matching,
)
from bccwalk.geometry import (
    Layout,
    Orientation,
    PhysicalContext,
    Segment,
    chi,
    default_fig1_layout,
    g_direction,
    layout_g_factor,
    parallelogram_layout,
    relative_phase,
    rotation_matrix,
    segment_phase,
)
from bccwalk.scan import (
    ScanResult,
    SiderealSeries,
    bound_estimate,
    grid_scan,
    optimize_orientation,
    sidereal_series,
)

__version__ = "0.1.0"
