"""Nodal statistics and sign-change certificates for Laplace eigenfunctions
that are symmetric under an involution."""
from .config import ExperimentConfig, load_config, parse_config, render_config
from .errors import LabError
from .geometry import SurfaceModel, make_surface
from .spectra import (EnsembleSpec, Eigenfunction, Parity, SphereMode, TorusMode,
                      ensemble_eigenfunction, explicit_eigenfunction)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "load_config", "parse_config", "render_config", "LabError",
    "SurfaceModel", "make_surface", "EnsembleSpec", "Eigenfunction", "Parity", "SphereMode",
    "TorusMode", "ensemble_eigenfunction", "explicit_eigenfunction",
]
