"""Randomized trust-region method for escaping saddle points."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
