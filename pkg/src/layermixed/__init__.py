"""Mixed finite elements for singularly perturbed reaction-diffusion on layer-adapted meshes.

Scalar unknowns live in broken Q_k, fluxes in RT_k or BDM_k; errors are
measured in the L2 components and the unbalanced and balanced triple norms.
"""

from .assembly import (MixedSolution, SparseSystem, assemble, bilinear_apply, canonical_interpolate,
                       chi_test_function, discrete_norms_sq, divergence_to_scalar, solve_direct,
                       weighted_l2_project)
from .errors import (ConstructionError, InvalidParameterError, LayerMixedError, NumericalFailure,
                     UnsupportedOperationError)
from .harness import RunConfig, render_table, run_single, run_sweep
from .mesh import (Layout, Mesh1D, MeshFamily, MeshGenFunction, Region, TensorMesh2D, build_mesh_1d,
                   build_tensor_mesh, mesh_stats, transition_point, uniform_mesh_1d)
from .norms import ErrorReport, compute_errors, convergence_rates, triple_norms
from .problems import ProblemSpec, eval_exact, make_polynomial_problem, make_corner_layer_problem
from .reference import (FluxFamily, QuadratureRule, flux_reference_basis, gauss_rule, piola_map,
                        scalar_reference_basis)
from .spaces import (FluxField, FluxSpace, ScalarField, ScalarSpace, build_flux_space,
                     build_scalar_space, normal_jump_diagnostic)

__version__ = "0.1.0"
