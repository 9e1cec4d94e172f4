"""De-biased Lasso inference for linear functionals in high-dimensional
Gaussian-design regression, with and without the degrees-of-freedom
adjustment."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
