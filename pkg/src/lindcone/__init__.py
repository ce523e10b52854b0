"""Numerical certificates for light-cone bounds of lattice Lindblad dynamics."""

from .bounds import (
    assemble_partition_constant,
    bounds_table,
    small_nu_slope,
    velocity_c_mu,
    velocity_c_prime,
)
from .evolve import matrix_exp, operator_norm, propagate, s1_opnorm_lower, trace_norm
from .liouvillian import (
    Superoperator,
    adjoint_generator,
    build_deformed_generator,
    build_gprime,
    build_gtilde,
    build_lindbladian,
)
from .model import JumpSpec, LatticeModel, ModelError, StripError, catalog_model, load_model
from .verify import CHECKS, CheckReport

__version__ = "0.1.0"
