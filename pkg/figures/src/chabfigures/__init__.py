"""Figure rendering for viscoplastic identification run outputs."""

from .io import (
    DensityData,
    HysteresisData,
    LoadPathData,
    PrincipalData,
    SchemaError,
    read_density,
    read_hysteresis,
    read_load_path,
    read_principal,
    read_result,
)
from .plots import plot_density, plot_hysteresis, plot_load_path, plot_yield_cylinder

__all__ = [
    "DensityData",
    "HysteresisData",
    "LoadPathData",
    "PrincipalData",
    "SchemaError",
    "read_density",
    "read_hysteresis",
    "read_load_path",
    "read_principal",
    "read_result",
    "plot_density",
    "plot_hysteresis",
    "plot_load_path",
    "plot_yield_cylinder",
]
