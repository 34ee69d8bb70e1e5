"""Transfer-operator numerics for piecewise expanding interval maps:
invariant densities by the Ulam method, the normalized transfer /
composition operator pair, p-variation calculus, kernel bases, and a
coboundary solver with its finite depth ladder.
"""

from .errors import (ConfigError, ConjugacyViolation, DegenerateDensity,
                     EmptyFamily, InvalidP, InvalidParams, LivsicError,
                     MeanNotZero, MissingWitness, NoConvergence, NoDecay,
                     NoObstruction, NotAHorseshoe, NotMonotone,
                     ResolutionMismatch)
from .maps import (Branch, HorseshoeWitness, PiecewiseMap, TransitionMatrix,
                   build_map, compose_with_self, find_horseshoe, orbit,
                   transition_matrix, unimodal_fixed_point,
                   unimodal_horseshoe_candidate)
from .observables import (Composed, Constant, FourierSum, GridFunction,
                          Homeomorphism, LinComb, Observable, PiecewiseLinear,
                          StepFunction, identity_homeomorphism,
                          inner_product_hm, mean_hm, midpoints, norm_l1_hm,
                          normalize_mean, sin_squared_homeomorphism, transport)
from .pvariation import BACKEND as PVAR_BACKEND
from .pvariation import PVariationResult, p_variation
from .transfer import (InvariantDensity, UlamMatrix, compute_invariant_density,
                       invariant_density, koopman_apply,
                       normalized_transfer_apply, perron_frobenius_apply,
                       spectral_decay, symbolic_koopman, symbolic_transfer,
                       ulam_matrix, uniform_density)
from .basis import (BasisElement, CoefficientTable, KernelPairFunction,
                    coefficient_table, first_obstruction, fourier_kernel_basis,
                    gram_schmidt, kernel_family)
from .cohomology import (LadderResult, SolveReport, SolverConfig,
                         alternating_coefficient_check, bound_constant,
                         coboundary_apply, depth_bound,
                         horseshoe_variation_check, ladder, neumann_solve,
                         transport_ladder, uniqueness_check)

__version__ = "0.1.0"
