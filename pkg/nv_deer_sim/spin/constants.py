"""Physical constants in the simulator's unit system.

Energies are frequencies in MHz (H means H/h), fields in gauss, times in ns
at API boundaries.
"""

# Bohr magneton over Planck constant
MU_B_MHZ_PER_G = 1.3996245

# Nuclear magneton over Planck constant (0.76226 kHz/G)
MU_N_MHZ_PER_G = 0.76226e-3

# 14N nuclear g-factor
G_N14 = 0.40376

NS_PER_US = 1000.0


def zeeman_mhz_per_gauss(g: float) -> float:
    """Electron Zeeman factor g*muB/h in MHz/G."""
    return g * MU_B_MHZ_PER_G
