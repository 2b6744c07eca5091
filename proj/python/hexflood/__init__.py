"""Hexagonal cellular-automata runoff simulation (Python bindings)."""

from ._hexflood import *  # noqa: F401,F403
from ._hexflood import REFERENCE_RAIN_RATE, __doc__  # noqa: F401
