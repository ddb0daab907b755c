"""Pseudo-differential operators on the tanh group G = (-1, 1)^n."""
from .group import (BoundaryWarning, GroupDomainError, distance_G, gop_add, gop_neg, haar_weight,
                    map_t, map_x)
from .grid import (CONVENTION, EdgeDecayWarning, GFunction, GridConfigError, Spectrum, TGrid, dfield,
                   fourier_G, inv_fourier_G, make_grid, plancherel_constant, sample)
from .symbols import Symbol, get_symbol, symbol_from_t_form
from .quantize import OperatorMatrix, apply_op, materialize_matrix

__version__ = "0.1.0"

__all__ = [
    "BoundaryWarning", "CONVENTION", "EdgeDecayWarning", "GFunction", "GridConfigError",
    "GroupDomainError", "OperatorMatrix", "Spectrum", "Symbol", "TGrid", "apply_op", "dfield",
    "distance_G", "fourier_G", "get_symbol", "gop_add", "gop_neg", "haar_weight", "inv_fourier_G",
    "make_grid", "map_t", "map_x", "materialize_matrix", "plancherel_constant", "sample",
    "symbol_from_t_form",
]
