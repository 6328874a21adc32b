"""Sampling on step-2 nilpotent Lie groups with Gabor-frame windows."""
from .algebra import (GroupElement, LieAlgebraSpec, SpecError, bracket, gamma_enumerate,
                      group_inverse, group_multiply, load_spec, parse_spec, validate)
from .fixtures import FIXTURE_NAMES, load_fixture
from .poly import CentralPolynomial, det_of_central_matrix, evaluate, homogeneity_degree

__version__ = "0.1.0"
