"""Natural pressure and natural dimension of continuous piecewise linear IFSs.

Core objects live in :mod:`cplifs.ifs_core`; dimension estimates in
:mod:`cplifs.pressure` (cylinder sums) and :mod:`cplifs.markov` (Markov
diagram); overlap and orbit diagnostics in :mod:`cplifs.orbit_graph`;
perturbation experiments in :mod:`cplifs.continuity_lab`.
"""
__version__ = "0.1.0"

from .ifs_core import (Cplifs, Interval, PLMap, SimilarityMap, cplifs_distance, cylinder, generated_self_similar,
                       supporting_interval, validate)
from .markov import grow_diagram, monotonicity_partition, natural_dimension_markov, pressure_via_diagram
from .pressure import direct_pressure, moran_dimension, natural_dimension_direct
from .weighted import spectral_radius

__all__ = [
    "Cplifs", "Interval", "PLMap", "SimilarityMap", "cplifs_distance", "cylinder", "generated_self_similar",
    "supporting_interval", "validate", "grow_diagram", "monotonicity_partition", "natural_dimension_markov",
    "pressure_via_diagram", "direct_pressure", "moran_dimension", "natural_dimension_direct", "spectral_radius",
]
