"""Transfer operators, pseudo-orbits, and metastability for noisy interval maps."""

from .errors import (
    BoundaryError,
    ConvergenceError,
    DiscontinuityError,
    DomainError,
    EpsTooLargeError,
    MarginViolationError,
    MetastabilityStructureError,
    NumericalError,
    PartitionMismatchError,
    PseudorbitError,
    StructuralError,
)
from .geometry import Interval
from .maps import (
    AffineBranch,
    PiecewiseMap,
    SkewFamily,
    doubling_map,
    example1_map,
    example2_base_map,
    example2_family,
    load_map,
    map_from_config,
    map_to_config,
    markov_check,
    save_map,
    tent_map,
)
from .noise import NoiseKernel, kernel_from_config, kernel_to_config, make_rng
from .pseudo_orbit import (
    CellGraph,
    ComponentDAG,
    TheoremReport,
    build_cell_graph,
    check_two_resolutions,
    component_relation,
    forward_invariant_hull,
    least_element_intervals,
    verify_theorem1,
)
from .simulate import (
    EmpiricalMeasure,
    EscapeStats,
    escape_time,
    l1_distance,
    run_chain,
    run_skew_chain,
    run_skew_ensemble,
)
from .spectral import (
    ErgodicComponent,
    SpectrumReport,
    metastability_report,
    recurrent_classes,
    stationary_densities,
    top_eigenvalues,
)
from .ulam import (
    Partition,
    Partition2D,
    TransferMatrix,
    build_perturbed,
    build_ulam,
    build_ulam_2d,
    load_matrix,
    noise_matrix,
    operator_distance,
    save_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AffineBranch",
    "BoundaryError",
    "CellGraph",
    "ComponentDAG",
    "ConvergenceError",
    "DiscontinuityError",
    "DomainError",
    "EmpiricalMeasure",
    "EpsTooLargeError",
    "ErgodicComponent",
    "EscapeStats",
    "Interval",
    "MarginViolationError",
    "MetastabilityStructureError",
    "NoiseKernel",
    "NumericalError",
    "Partition",
    "Partition2D",
    "PartitionMismatchError",
    "PiecewiseMap",
    "PseudorbitError",
    "SkewFamily",
    "SpectrumReport",
    "StructuralError",
    "TheoremReport",
    "TransferMatrix",
    "build_cell_graph",
    "build_perturbed",
    "build_ulam",
    "build_ulam_2d",
    "check_two_resolutions",
    "component_relation",
    "doubling_map",
    "escape_time",
    "example1_map",
    "example2_base_map",
    "example2_family",
    "forward_invariant_hull",
    "kernel_from_config",
    "kernel_to_config",
    "l1_distance",
    "least_element_intervals",
    "load_map",
    "load_matrix",
    "make_rng",
    "map_from_config",
    "map_to_config",
    "markov_check",
    "metastability_report",
    "noise_matrix",
    "operator_distance",
    "recurrent_classes",
    "run_chain",
    "run_skew_chain",
    "run_skew_ensemble",
    "save_map",
    "save_matrix",
    "stationary_densities",
    "tent_map",
    "top_eigenvalues",
    "verify_theorem1",
]
