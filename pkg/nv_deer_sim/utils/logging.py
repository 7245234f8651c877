"""Logging utilities for nv-deer-sim.

All messages go to stderr so that CSV/JSON written to stdout stays clean.
"""

import os
import sys


class Colors:
    """ANSI color codes for terminal output"""
    RESET = '\033[0m'
    BOLD = '\033[1m'
    RED = '\033[1;31m'
    GREEN = '\033[1;32m'
    YELLOW = '\033[1;33m'
    BLUE = '\033[1;34m'
    CYAN = '\033[1;36m'
    GREY = '\033[0;37m'


# Verbosity levels: 0 = quiet (warnings and errors only), 1 = normal, 2 = debug
_verbosity = 1


def set_verbosity(level: int) -> None:
    """Set the global verbosity level (0 quiet, 1 normal, 2 debug)."""
    global _verbosity
    _verbosity = max(0, min(2, int(level)))


def get_verbosity() -> int:
    return _verbosity


def _use_color() -> bool:
    if os.environ.get("NO_COLOR"):
        return False
    try:
        return sys.stderr.isatty()
    except (AttributeError, ValueError):
        return False


def _emit(color: str, text: str) -> None:
    if _use_color():
        print(f"{color}{text}{Colors.RESET}", file=sys.stderr)
    else:
        print(text, file=sys.stderr)


def log_debug(message):
    """Log debug message in grey (only with --verbose)"""
    if _verbosity >= 2:
        _emit(Colors.GREY, f"[DEBUG] {message}")


def log_info(message):
    """Log info message in green"""
    if _verbosity >= 1:
        _emit(Colors.GREEN, f"[INFO]  {message}")


def log_warn(message):
    """Log warning message in yellow"""
    _emit(Colors.YELLOW, f"[WARN]  {message}")


def log_error(message):
    """Log error message in red"""
    _emit(Colors.RED, f"[ERROR] {message}")


def log_step(message):
    """Log step message in blue with newline before"""
    if _verbosity >= 1:
        _emit(Colors.BLUE, f"\n[STEP]  {message}")


def log_success(message):
    """Log success message in bold green"""
    if _verbosity >= 1:
        _emit(Colors.BOLD + Colors.GREEN, f"✓ {message}")
