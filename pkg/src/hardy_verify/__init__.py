"""Numerical verification of Hardy-type inequalities in annuli and exteriors of balls."""

from hardy_verify.params import ProblemParams, derive_params, unit_sphere_area

__version__ = "0.1.0"

__all__ = ["ProblemParams", "derive_params", "unit_sphere_area", "__version__"]
