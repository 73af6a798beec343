"""Hybrid fuzzing laboratory: IR interpreter, bug labeling, reachability
analysis, fuzzer/concolic campaign driver and benchmark generator."""

from hfl._core import *  # noqa: F401,F403
from hfl._core import __doc__ as _core_doc  # noqa: F401
