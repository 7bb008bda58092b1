"""Secret-key agreement toolkit for multiterminal sources.

Computes secret-key capacity exactly via the fractional-partition linear
program, models pairwise independent networks (an independent fair bit
per graph edge, seen by both endpoints), evaluates entropic quantities
of linear functions by GF(2) rank arithmetic, packs edge-disjoint
spanning trees into linear omniscience/key protocols, and verifies every
identity against a brute-force enumeration oracle at desk scale.
"""

__version__ = "0.1.0"

from .cmi import (
    CmiReport,
    cmi_oracle,
    conditioning_identity_residual,
    disclosure_bound_margin,
)
from .gf2 import (
    BitMatrix,
    ColumnSpace,
    DimensionError,
    LabelError,
    RowSpan,
    conditional_entropy_of_linear,
    entropy_of_linear,
    in_row_span,
    mutual_information_linear,
    rank,
    reduced_row_echelon,
    restrict_columns,
    stack,
    unit_row,
)
from .partition import (
    CapacityResult,
    FractionalPartition,
    OptimalityCertificate,
    PartitionError,
    canonical_lambda_star,
    leave_one_out_partition,
    proper_subsets,
    solve_capacity,
    verify_partition_optimal,
)
from .pin import (
    Graph,
    GraphError,
    LinearTranscript,
    PackingError,
    PinInstance,
    PinProtocol,
    TreePacking,
    build_pin,
    cmi_rank,
    cmi_rank_lower_bound,
    compile_tree_protocol,
    incidence_rank_margin,
    incident_columns,
    internal_columns,
    matrix_outcome_map,
    omniscience_rate,
    pack_spanning_trees,
    packing_rate,
    pin_subset_entropies,
    terminal_view,
)
from .protocol import (
    BoundReport,
    CiVerdict,
    CommonRandomnessClaim,
    RecoveryVerdict,
    SecretKeyVerdict,
    TranscriptError,
    TranscriptVerdict,
    communication_bound_report,
    communication_entropy_margin,
    is_common_randomness,
    is_interactive_ci,
    is_secret_key,
    random_transcript,
    validate_transcript,
)
from .sources import (
    ExactnessError,
    JointPMF,
    OracleScaleError,
    PmfError,
    conditional_subset_entropy,
    entropy_of_function,
    iid_power,
    mask_from_terminals,
    pin_to_pmf,
    pmf_from_json_obj,
    pmf_to_json_obj,
    subset_entropy,
    terminals_from_mask,
    uniform_bits_pmf,
)

__all__ = [name for name in dir() if not name.startswith("_")]
