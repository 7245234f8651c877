#!/usr/bin/env python3
"""NV DEER Simulator - Thin wrapper for running from a checkout.

Prefer using one of these instead:
  - nv-deer-sim           (if installed via pip)
  - python3 -m nv_deer_sim
"""

import sys

from nv_deer_sim.cli import main

if __name__ == "__main__":
    sys.exit(main())
