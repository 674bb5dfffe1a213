"""weightlab: a desk-scale workbench for weighted-norm harmonic analysis
on finite dyadic grids.

Submodules:
  grids          dyadic grids, cubes, grid functions, averages, lattices
  weights        weight generators and Muckenhoupt-type constants
  maximal        maximal operators, sparse families, sparse operators
  spaces         norm oracles and space algebra for the two space families
  extrapolation  exact exponent calculus, iteration weights, reverse Hoelder
  compactness    discretized singular integrals and decay probes
  runner / cli   deterministic batch experiments and the command line
"""

from .exponents import INF, as_exponent, conjugate
from .grids import Box, DyadicCube, Grid, GridFunction, average, enumerate_cubes, shifted_lattices
from .weights import Weight, WeightConstants, ainf_constant, ap_constant, limited_range_constant, power_weight
from .maximal import (
    OperatorNormEstimate,
    SparseFamily,
    bilinear_maximal,
    cz_sparse_family,
    iterate_maximal,
    maximal,
    operator_norm_lower_bound,
    sparse_operator,
    verify_sparse,
)
from .spaces import (
    SpaceSpec,
    VariableLebesgue,
    WeightedLebesgue,
    associate_spec,
    concavify_spec,
    convexity_check,
    modular,
    product_norm,
    product_spec,
    rescale_spec,
    space_norm,
)
from .extrapolation import (
    ExtrapolationPlan,
    RdFWeight,
    buckley_bound,
    choose_rs_for_L2,
    limited_range_plan,
    lr_rescale_t,
    lr_theta_p,
    rdf_weight,
    rescaled_exponents,
    reverse_holder_check,
    self_improvement_r0,
    smallest_sufficient_cd,
)
from .compactness import (
    KernelSpec,
    OperatorMatrix,
    SymbolFunction,
    bmo_norm,
    commutator_matrix,
    compactness_profile,
    discretize,
    symbol_generator,
    weighted_singular_values,
)

__version__ = "0.1.0"
