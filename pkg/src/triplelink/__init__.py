"""Milnor triple linking, configuration-space cycles and third-order helicity."""

from .curves import Link3, ParametricCurve, borromean_standard
from .invariants import InvariantReport, mu12_crossings, mu12_gauss, mu123_hopf
from .tubes import FluxTube, TubeField, load_tubes, make_tube_field
from .helicity import estimate_H123, sdiff_invariance_test, shear
from .energy import bound_report

__all__ = ["Link3", "ParametricCurve", "borromean_standard", "InvariantReport",
           "mu12_crossings", "mu12_gauss", "mu123_hopf", "FluxTube", "TubeField",
           "make_tube_field", "load_tubes", "estimate_H123",
           "sdiff_invariance_test", "shear", "bound_report"]
__version__ = "0.1.0"
