"""Two-qubit states, separability verdicts and proper/improper mixture simulation."""

from .operators import (
    DensityError,
    DensityOperator,
    HermiticityError,
    PositivityError,
    PureState,
    Side,
    TraceError,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    tensor,
    validate_density,
)
from .states import (
    BellKind,
    Component,
    MixtureSpec,
    Provenance,
    bell_diagonal,
    bell_state,
    maximally_mixed,
    mix,
    product_state,
    werner,
)
from .fano import FanoForm, Region, fano_decompose, fano_reconstruct, in_octahedron, in_tetrahedron, path_crossing
from .separability import (
    Classification,
    NoSignChangeError,
    Status,
    Verdict,
    chsh_criterion,
    classify_mixture,
    ppt_classify,
    separability_boundary,
)
from .ensemble import (
    CHSHSettings,
    EnsembleRecord,
    MeasurementSetting,
    PreparationConfig,
    TagBlind,
    TagEquals,
    build_joint_state,
    empirical_density,
    estimate_chsh,
    optimal_chsh_settings,
    place_select,
    promote_by_measurement,
    run_preparation,
    sample_local_measurement,
    typical_weight,
)

__version__ = "0.1.0"

__all__ = [
    "DensityError",
    "DensityOperator",
    "HermiticityError",
    "PositivityError",
    "PureState",
    "Side",
    "TraceError",
    "hermitian_eigenvalues",
    "partial_trace",
    "partial_transpose",
    "tensor",
    "validate_density",
    "BellKind",
    "Component",
    "MixtureSpec",
    "Provenance",
    "bell_diagonal",
    "bell_state",
    "maximally_mixed",
    "mix",
    "product_state",
    "werner",
    "Classification",
    "NoSignChangeError",
    "Status",
    "Verdict",
    "chsh_criterion",
    "classify_mixture",
    "ppt_classify",
    "separability_boundary",
    "CHSHSettings",
    "EnsembleRecord",
    "MeasurementSetting",
    "PreparationConfig",
    "TagBlind",
    "TagEquals",
    "build_joint_state",
    "empirical_density",
    "estimate_chsh",
    "optimal_chsh_settings",
    "place_select",
    "promote_by_measurement",
    "run_preparation",
    "sample_local_measurement",
    "typical_weight",
    "FanoForm",
    "Region",
    "fano_decompose",
    "fano_reconstruct",
    "in_octahedron",
    "in_tetrahedron",
    "path_crossing",
]
