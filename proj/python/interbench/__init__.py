"""Interaction benchmark for ML attacks and defenses."""

try:
    from ._interbench import *  # noqa: F401,F403  (installed layout)
except ImportError:  # build-tree layout: extension sits next to the package dir
    from _interbench import *  # noqa: F401,F403

from ._version import __version__  # noqa: F401
