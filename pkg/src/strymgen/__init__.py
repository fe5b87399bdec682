"""Complete stream fusion by staging: pipelines compile to one imperative IR program."""

from .api import (
    Pipeline, PipelineError, arr_param, compile, filter, flat_map, fold, int_param, iota,
    map, of_arr, take, unfold, zip_with,
)
from .ir.nodes import Session

__version__ = "0.1.0"

__all__ = [
    "Pipeline", "PipelineError", "Session", "arr_param", "compile", "filter", "flat_map", "fold",
    "int_param", "iota", "map", "of_arr", "take", "unfold", "zip_with",
]
