"""NV DEER Simulator - Main package

Spin Hamiltonians, pulse-sequence propagation and ensemble spectra for
photocurrent- and fluorescence-detected DEER on NV centers in diamond.
"""

__version__ = "1.0.0"
__package_name__ = "nv-deer-sim"
