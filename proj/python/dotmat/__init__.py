"""Data-free matrix factorization toolkit.

Everything lives in the compiled extension; this package just re-exports it.
"""

from ._dotmat import *  # noqa: F401,F403
from ._dotmat import __doc__  # noqa: F401

__version__ = "0.1.0"
