"""
Physical constants (CODATA, via scipy.constants) and the material data of the shipped presets.
"""

from scipy import constants as _sc

C_LIGHT: float = _sc.c
HBAR: float = _sc.hbar
EPSILON0: float = _sc.epsilon_0
MU0: float = _sc.mu_0

# crystalline silicon, (100) orientation, at 1550 nm
SILICON_N = 3.4757
SILICON_RHO0 = 2329.0  # kg/m^3
SILICON_C11 = 165.7e9  # Pa
SILICON_C12 = 63.9e9  # Pa
SILICON_C44 = 79.6e9  # Pa
SILICON_ALPHA = 1e-8 * 1e2  # 1e-8 1/cm in 1/m
SILICON_BREAKDOWN_ENERGY_DENSITY = 13.3e6  # 13.3 J/cm^3 in J/m^3

# silicon reference pulse
REFERENCE_U0 = 5e-3  # J
REFERENCE_LAMBDA0 = 1550e-9  # m
REFERENCE_DELTA_KX_OVER_K0 = 1e-4
REFERENCE_REL_BANDWIDTH = 1e-5

# the desk-scale pulse keeps the per-photon observables of the reference pulse but fits on a workstation grid
DESK_WAIST_WAVELENGTHS = 20.0  # w0 = 20 * lambda0 / n
DESK_REL_BANDWIDTH = 1e-2
