"""
Calabi Lab - weighted minimal graphs in R^3, weighted maximal graphs in L^3 and the correspondence between them
"""

from .core.weights import WeightFunction, WeightKind, dual_weight, make_weight, parse_weight_spec
from .core.diffgeom import GraphSurface, Grid2D, Signature, geometry, pde_residual
from .core.calabi import (CalabiPair, InvariantReport, forward_transform, inverse_transform,
                          resample_image_graph, verify_pair)
from .core.radial import (bowl_profile, lorentz_bowl_profile, lorentz_winglike_profile, transform_profile,
                          winglike_profile)
from .core.hyperbolic import grim_reaper, hyperbolic_partner, hyperbolic_profile, hyperbolic_revolve
from .utils.mesh import SurfaceMesh
from .utils.report_store import ReportStore

__version__ = '0.1.0'
