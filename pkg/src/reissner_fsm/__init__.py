"""Fourier series multiscale solver for a thick (Reissner) plate resting
on a two-parameter (Pasternak) foundation."""

from .model import (EdgeCondition, Foundation, Geometry, Material, ModelSpec,
                    SpecError, constants_for, derive_constants, nondimensionalize,
                    uniform_load, validate_spec)

__version__ = "0.1.0"

__all__ = ["EdgeCondition", "Foundation", "Geometry", "Material", "ModelSpec",
           "SpecError", "constants_for", "derive_constants", "nondimensionalize",
           "uniform_load", "validate_spec"]
