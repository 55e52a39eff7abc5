"""Perceptual color difference from thresholded CIEDE2000 and basic color terms."""

__version__ = "0.1.0"

from .colorspace import LabColor, RgbColor, ciede2000, d1, rgb_to_lab
from .emd import TransportPlan, TransportProblem, emd, solve_transport
from .metric import (ColDist, ColorDifference, ColorRepr, MetricParams, NegativeExponent,
                     ThresholdedCiede2000, col_dist, d2, d3, make_metric, ne_dist, represent, tc_dist)
from .naming import (GroundMatrix, NamingTable, fallback_table, learn_ground_distance, load_ground_matrix,
                     load_naming_table, save_ground_matrix, term_probabilities)
from .compass import EdgeMap, Signature, build_signature, compass_response, detect_edges, thin

__all__ = [
    "LabColor", "RgbColor", "ciede2000", "d1", "rgb_to_lab",
    "TransportPlan", "TransportProblem", "emd", "solve_transport",
    "ColDist", "ColorDifference", "ColorRepr", "MetricParams", "NegativeExponent", "ThresholdedCiede2000",
    "col_dist", "d2", "d3", "make_metric", "ne_dist", "represent", "tc_dist",
    "GroundMatrix", "NamingTable", "fallback_table", "learn_ground_distance", "load_ground_matrix",
    "load_naming_table", "save_ground_matrix", "term_probabilities",
    "EdgeMap", "Signature", "build_signature", "compass_response", "detect_edges", "thin",
]
