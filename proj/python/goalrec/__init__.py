"""Goal recognition over precomputed plan banks (continuous and STRIPS)."""

from ._goalrec import *  # noqa: F401,F403
from ._goalrec import __doc__  # noqa: F401
