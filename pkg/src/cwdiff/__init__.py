"""Complex-weighted graph diffusion and the CWCN model."""

from .balance import (
    BalanceCheck,
    Partition,
    SteadyState,
    construct_balanced_weights,
    is_structurally_balanced,
    path_phase,
    recover_partition_from_phases,
    same_partition,
    steady_state_closed_form,
)
from .diffusion import (
    FeatureMatrix,
    Trajectory,
    euler_step_complex,
    heat_step,
    real_transition_matrix,
    run_diffusion,
)
from .graphs import (
    LEARNED_WEIGHT_DEGREE_FLOOR,
    ComplexWeightedGraph,
    Graph,
    SparseComplex,
    SparseReal,
    TransitionMatrix,
    complex_degrees,
    hermitian_check,
    laplacian_complement,
    normalized_laplacian,
    rw_laplacian,
    transition_matrix,
)

__version__ = "0.1.0"
