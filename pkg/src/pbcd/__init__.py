"""Parallel randomized block-coordinate descent for composite convex problems.

Library layout:

* blocks        -- partitions, incidence structure, step weights, norms
* smooth        -- smooth component families (residual, logistic, dual)
* regularizers  -- separable nonsmooth terms with closed-form prox maps
* problem       -- assembled composite problems and evaluation
* sampling      -- random block-subset generation
* solver        -- the sampled descent iteration and reference modes
* analysis      -- rate bounds and generalized error bound diagnostics
* generators    -- reproducible benchmark instances
* matrixio      -- coordinate matrix / vector text files
* experiment    -- orchestration and CSV output
* cli           -- command-line entry point
"""

from .analysis import (ErrorBoundFit, RateBundle, bundle_from_reference,
                       error_bound_chain, estimate_strong_convexity,
                       fit_error_bound_constants,
                       iters_to_confidence_error_bound,
                       iters_to_confidence_sublinear, linear_rate_error_bound,
                       linear_rate_strongly_convex, sublinear_gap_bound)
from .blocks import (BipartiteStructure, BlockPartition, BlockWeights,
                     build_structure, compute_block_weights, weighted_norm,
                     weighted_norm_inv)
from .errors import (CacheConsistencyError, DescentViolationError,
                     ErrorBoundWitnessError, InputError, InternalError,
                     StructureError)
from .experiment import (ExperimentConfig, build_problem, load_config,
                         reference_solution, run_experiment)
from .generators import (GeneratedProblem, dual_from_data, generate_dual,
                         generate_lasso, generate_logistic,
                         lasso_from_matrix, logistic_from_matrix)
from .matrixio import (MatrixFile, load_matrix, load_vector, save_matrix,
                       save_vector)
from .problem import CompositeProblem, assemble_problem
from .regularizers import (Box, L1, L1Box, NonnegOrthant, Zero, prox_block,
                           value_block)
from .sampling import BlockSampler, SamplerConfig
from .smooth import (LogisticLoss, QuadraticConjugateDual, QuadraticResidual,
                     coordinatewise_constants, make_logistic,
                     make_quadratic_conjugate_dual, make_quadratic_residual,
                     spectral_norm_sq)
from .solver import (SolveResult, SolverConfig, SolverState, Trace,
                     coordwise_weights, init_solver_state, run, step,
                     verify_and_refresh_caches)

__version__ = "0.1.0"
