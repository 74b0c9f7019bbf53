"""Differential verification of structurally identical neural networks.

Proves that two networks with the same architecture (feed-forward, vanilla
RNN or LSTM with sigmoid/tanh activations) but different weights produce
outputs that differ by less than a given epsilon over a box of inputs.
"""

from .engine import PROVED, UNKNOWN, VerdictReport, naive_output_diff, verify
from .global_opt import OptParams, de_extremize
from .interval import Box, Interval, IntervalVector, SymBounds, concretize, sym_affine
from .netmodel import (Activation, ArchSpec, DiffNetwork, InputRegion, Network,
                       diff_weights, forward, generate_network, load_network,
                       quantize_weights, save_network)
from .scalar_diff import DiffBoundQuery, act_diff_bounds, act_value_bounds
from .surfaces import SurfaceKind
from .validator import Side, ValidatorParams, check_exceeds, validate_and_adjust

__all__ = [
    "PROVED", "UNKNOWN", "VerdictReport", "naive_output_diff", "verify",
    "OptParams", "de_extremize",
    "Box", "Interval", "IntervalVector", "SymBounds", "concretize", "sym_affine",
    "Activation", "ArchSpec", "DiffNetwork", "InputRegion", "Network", "diff_weights",
    "forward", "generate_network", "load_network", "quantize_weights", "save_network",
    "DiffBoundQuery", "act_diff_bounds", "act_value_bounds",
    "SurfaceKind",
    "Side", "ValidatorParams", "check_exceeds", "validate_and_adjust",
]
