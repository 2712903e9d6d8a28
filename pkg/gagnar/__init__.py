"""
Grouped network autoregression with a graph-assisted Chinese restaurant
process prior.

The package fits panels of node-level time series observed on a network,
clustering nodes into groups that share regression coefficients:
- Collapsed Gibbs sampling with graph-aware group stickiness
- Dahl point estimates and LPML-based choice of the smoothing scale
- One-step-ahead prediction, HPD intervals, RMSE and ARI
- Stochastic block model and surrogate-graph simulation studies
"""

__version__ = "0.1.0"

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all

__all__ = [*_core_all, "__version__"]
