"""Multi-objective bi-level optimisation.

Thin bindings over the C++ core: unrolled lower-level descent, reverse-mode hypergradients,
MGDA min-norm weighting, Pareto-front utilities and the built-in problem suite.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
