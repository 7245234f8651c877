"""Spin operators, defect Hamiltonians and transition lines."""
