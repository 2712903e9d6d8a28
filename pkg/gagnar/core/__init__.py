"""
Numerical core: graph products, the NIG regression model, the collapsed
Gibbs sampler and post-processing.
"""

from .errors import DataIOError, GagnarError, NumericalError, ValidationError
from .graph import AdjacencyMatrix, NetworkData, load_edge_list
from .model import GroupParams, NIGHyper, PanelData
from .posthoc import (
    FitResult,
    adjusted_rand_index,
    dahl_select,
    hpd_interval,
    lpml,
    predict,
    remspe,
    select_h,
)
from .sampler import ChainDraws, SamplerConfig, run_chain

__all__ = [
    "AdjacencyMatrix",
    "ChainDraws",
    "DataIOError",
    "FitResult",
    "GagnarError",
    "GroupParams",
    "NIGHyper",
    "NetworkData",
    "NumericalError",
    "PanelData",
    "SamplerConfig",
    "ValidationError",
    "adjusted_rand_index",
    "dahl_select",
    "hpd_interval",
    "load_edge_list",
    "lpml",
    "predict",
    "remspe",
    "run_chain",
    "select_h",
]
