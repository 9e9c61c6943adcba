"""Python interface to the space-time boundary element solver."""

from _tdbem import *  # noqa: F401,F403
