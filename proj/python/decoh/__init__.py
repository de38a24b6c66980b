"""Qubit dephasing under classical noise and dynamical decoupling."""

from ._decoh import *  # noqa: F401,F403
from ._decoh import __version__  # noqa: F401
