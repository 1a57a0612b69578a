"""Probability-of-superiority scoring of spatial relations in images.

The engine scores how well an image realizes a stated spatial relation
between two objects by comparing projected mass distributions (masks or
attention maps), provides analytic gradients of the superiority loss for
generation-time steering, and selects among generators online with an
upper-confidence bandit.
"""

from .bench import (
    AggregateReport,
    ClassificationMetrics,
    CorrelationResult,
    aggregate,
    best_of_n,
    classification_metrics,
    correlations,
)
from .core import (
    DEPTH_BINS_DEFAULT,
    THRESHOLD_DEFAULT,
    DepthMap,
    DiscreteDistribution1D,
    MassMap2D,
    ProjectionAxis,
    depth_distribution,
    directional_pos,
    directional_pos_3d,
    pos_discrete,
    pos_distance,
    pos_distance_omni,
    pos_projected,
    project_mass_map,
    pse,
    pse_3d,
    pse_binary,
    tie_mass,
)
from .errors import (
    ContractViolationError,
    DimensionMismatchError,
    EmptyMapError,
    MalformedFileError,
    MissingDepthError,
    PosrelError,
    UnknownTokenError,
    UnsupportedFormatError,
)
from .guidance import (
    LARGE_BACKBONE_DEFAULT,
    SMALL_BACKBONE_DEFAULT,
    CombinedGradient,
    GradientResult,
    GuidanceConfig,
    combined_loss_grad,
    pos_loss_grad,
    step_scale,
)
from .opse import (
    ALPHA_DEFAULT,
    ArmState,
    BanditState,
    SimulationResult,
    select_arm,
    simulate,
    ucb_value,
    update,
)
from .pipeline import (
    CorruptionSpec,
    EvalSettings,
    ScoreRecord,
    center_baseline,
    corrupt_mask,
    evaluate_pair,
)
from .relations import (
    ParseResult,
    RelationKind,
    RelationSpec,
    inverse_kind,
    load_relations,
    normalize_kind_token,
    parse_prompt,
    render_relation,
)
from .fileio import load_attention, load_depth, load_mask

__all__ = [
    "AggregateReport",
    "ALPHA_DEFAULT",
    "ArmState",
    "BanditState",
    "ClassificationMetrics",
    "CombinedGradient",
    "ContractViolationError",
    "CorrelationResult",
    "CorruptionSpec",
    "DEPTH_BINS_DEFAULT",
    "DepthMap",
    "DimensionMismatchError",
    "DiscreteDistribution1D",
    "EmptyMapError",
    "EvalSettings",
    "GradientResult",
    "GuidanceConfig",
    "LARGE_BACKBONE_DEFAULT",
    "MalformedFileError",
    "MassMap2D",
    "MissingDepthError",
    "ParseResult",
    "PosrelError",
    "ProjectionAxis",
    "RelationKind",
    "RelationSpec",
    "SMALL_BACKBONE_DEFAULT",
    "ScoreRecord",
    "SimulationResult",
    "THRESHOLD_DEFAULT",
    "UnknownTokenError",
    "UnsupportedFormatError",
    "aggregate",
    "best_of_n",
    "center_baseline",
    "classification_metrics",
    "combined_loss_grad",
    "correlations",
    "corrupt_mask",
    "depth_distribution",
    "directional_pos",
    "directional_pos_3d",
    "evaluate_pair",
    "inverse_kind",
    "load_attention",
    "load_depth",
    "load_mask",
    "load_relations",
    "normalize_kind_token",
    "parse_prompt",
    "pos_discrete",
    "pos_distance",
    "pos_distance_omni",
    "pos_loss_grad",
    "pos_projected",
    "project_mass_map",
    "pse",
    "pse_3d",
    "pse_binary",
    "render_relation",
    "select_arm",
    "simulate",
    "step_scale",
    "tie_mass",
    "ucb_value",
    "update",
]
