"""solgrid: a numerical laboratory for expanding circle maps, solenoid
scaling functions, self-similar grids, and distortion-based smoothness
classification of interval homeomorphisms."""

from .classify import (
    EnvelopeStats,
    SmoothnessVerdict,
    Table1Report,
    Tolerances,
    classify_cross,
    classify_ratio,
    envelope_fit,
    table1_experiment,
    verdict_rank,
)
from .circle import (
    CircleMap,
    ExtractionDiagnostics,
    LinearMap,
    SampledMonotoneMap,
    TrigPerturbedMap,
    conjugacy_map,
    eq12_2_diagnostic,
    extract_solenoid,
    fixed_point,
    partition,
    realize_map,
)
from .dadic import DadicWord, add_one, agreement_depth, word_from_integer
from .distortion import (
    Affine,
    DistortionDataset,
    GridSpec,
    Homeomorphism,
    Moebius,
    MonomialPerturbation,
    PiecewiseMonotone,
    Power,
    build_grid,
    crd,
    cross_ratio,
    dyadic_grid,
    grid_from_levels,
    grid_from_partition,
    lrd,
    sweep,
    taylor_identity_residual,
)
from .errors import (
    CapExceeded,
    Degenerate,
    DegreeMismatch,
    DepthExceeded,
    DomainViolation,
    GridAxiomViolation,
    Inconsistent,
    IndexOutOfRange,
    NoConvergence,
    NonPositive,
    NotAdjacent,
    Overflow,
    SolgridError,
    TooFewLevels,
    WindowTooNarrow,
)
from .solenoid import (
    ModulusFit,
    SolenoidTable,
    cross_ratio_fn,
    cross_ratio_values,
    evaluate_at_word,
    generate_from_free_data,
    holder_modulus_fit,
    matching_residual,
    matching_residuals,
    matching_rhs,
    quasiperiodicity_modulus,
)
from .tiling import (
    PartitionLevels,
    TilingWindow,
    amalgamate,
    cross_level_consistency,
    fixed_point_residual,
    realize_levels,
    window_from_table,
)
from .ultrametric import (
    UltraMetricEvaluator,
    build_evaluator,
    cylinder_length,
    u_metric,
    u_metric_series_diagnostic,
)

__version__ = "0.1.0"
