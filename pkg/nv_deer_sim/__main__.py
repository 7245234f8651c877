"""Allow running the package with python3 -m nv_deer_sim"""

import sys

from nv_deer_sim.cli import main

sys.exit(main())
