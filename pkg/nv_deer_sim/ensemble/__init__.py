"""Ensemble observables: broadened stick spectra, DEER spectra and readout."""
