"""Ready-made pulse sequences stored under templates/*.seq."""

import os
from typing import Dict, List

from ..errors import ValidationError
from ..utils.logging import log_debug

TEMPLATES_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "templates")

# Used when the templates directory is not shipped alongside the package
_FALLBACK_TEMPLATES: Dict[str, str] = {
    "rabi": "mw pi @ f2;\nread\n",
    "hahn_echo": (
        "mw pi/2 @ f2;\ndelay 1400 ns;\nmw pi @ f2;\ndelay 1400 ns;\nmw pi/2 @ f2;\nread\n"
    ),
    "deer": (
        "mw pi/2 @ f2;\ndelay 1400 ns;\nmw pi @ f2;\nrf 60 ns @ II;\n"
        "delay 1400 ns;\nmw pi/2 @ f2;\nread\n"
    ),
    "deer_rabi": (
        "mw pi/2 @ f2;\ndelay 1400 ns;\nmw pi @ f2;\nrf 120 ns @ II;\n"
        "delay 1400 ns;\nmw pi/2 @ f2;\nread\n"
    ),
}


def _template_path(name: str) -> str:
    return os.path.join(TEMPLATES_DIR, f"{name}.seq")


def template_names() -> List[str]:
    names = set(_FALLBACK_TEMPLATES)
    if os.path.isdir(TEMPLATES_DIR):
        names.update(f[:-4] for f in os.listdir(TEMPLATES_DIR) if f.endswith(".seq"))
    return sorted(names)


def load_template(name: str) -> str:
    """Sequence text of template ``name``."""
    path = _template_path(name)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            log_debug(f"template {name} from {os.path.normpath(path)}")
            return fh.read()
    except FileNotFoundError:
        if name in _FALLBACK_TEMPLATES:
            return _FALLBACK_TEMPLATES[name]
    raise ValidationError(f"unknown template '{name}' (available: {', '.join(template_names())})")
