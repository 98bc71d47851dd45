"""Time-domain boundary element solver for the 3D wave equation."""

from ._core import (
    Mesh,
    RunConfig,
    eval_basis,
    icosphere,
    load_mesh,
    recurrence_coeff,
    run,
    single_layer_coeff,
    sphere_reference,
    weights,
)

__all__ = [
    "Mesh",
    "RunConfig",
    "eval_basis",
    "icosphere",
    "load_mesh",
    "recurrence_coeff",
    "run",
    "single_layer_coeff",
    "sphere_reference",
    "weights",
]
