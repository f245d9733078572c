"""Physical constants and default experimental parameters.

CODATA values for c and hbar; every function taking them accepts overrides.
The neutron defaults describe a thermal-neutron interferometer with 10 cm
arms, the reference configuration for all bound estimates.
"""

SPEED_OF_LIGHT = 299792458.0        # m/s
HBAR = 1.054571817e-34              # J s

NEUTRON_MASS = 1.675e-27            # kg
THERMAL_NEUTRON_MOMENTUM = 3.7e-24  # kg m/s
DEFAULT_ARM_LENGTH = 0.1            # m

SIDEREAL_DAY = 86164.0              # s (23 h 56 min 4 s)

PLANCK_LENGTH = 1.616e-35           # m
