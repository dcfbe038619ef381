"""Multi-beam millimeter-wave link simulation and analysis."""

from ._core import *  # noqa: F401,F403
