"""ganens: Pareto-optimal generator-ensemble selection from feature embeddings."""

__version__ = "0.1.0"

from .errors import (
    DataError,
    GanensError,
    NumericError,
    ParameterError,
    ShortfallWarning,
)
from .store import (
    EmbeddingSet,
    GeneratorRecord,
    Pool,
    load_pool,
    read_embeddings,
    write_embeddings,
)
from .metrics import (
    GaussianSummary,
    MetricConfig,
    MetricKind,
    Orientation,
    RadiusProfile,
    coverage,
    density,
    density_coverage,
    frechet_distance,
    gaussian_summary,
    harmonic_d,
    knn_radii,
    metric_d,
    pairwise_distances,
)
from .objective import (
    EnsembleEvaluator,
    EnsembleGenome,
    ObjectiveVector,
    PairwiseMatrix,
    build_union,
    inter_d,
    intra_d,
    pairwise_matrix,
    quota_plan,
    subsample_rows,
)
from .optimize import (
    Algorithm,
    ParetoFront,
    SearchConfig,
    SearchResult,
    SelectionManifest,
    dominates,
    extract_front,
    search,
    select_best,
    uniobjective_search,
)
from .simulate import (
    GeneratorProfile,
    ModeSpec,
    SimSpec,
    canonical_fixture_path,
    emit_pool,
    load_profile_spec,
    sample_generator,
    sample_real,
)
from .report import (
    GapReport,
    QualityRow,
    compute_gap,
    gmean_from_confusion,
    quality_rows,
    round_half_away,
)

__all__ = [
    "__version__",
    "Algorithm",
    "DataError",
    "EmbeddingSet",
    "EnsembleEvaluator",
    "EnsembleGenome",
    "GanensError",
    "GapReport",
    "GaussianSummary",
    "GeneratorProfile",
    "GeneratorRecord",
    "MetricConfig",
    "MetricKind",
    "ModeSpec",
    "NumericError",
    "ObjectiveVector",
    "Orientation",
    "PairwiseMatrix",
    "ParameterError",
    "ParetoFront",
    "Pool",
    "QualityRow",
    "RadiusProfile",
    "SearchConfig",
    "SearchResult",
    "SelectionManifest",
    "ShortfallWarning",
    "SimSpec",
    "build_union",
    "canonical_fixture_path",
    "compute_gap",
    "coverage",
    "density",
    "density_coverage",
    "dominates",
    "emit_pool",
    "extract_front",
    "frechet_distance",
    "gaussian_summary",
    "gmean_from_confusion",
    "harmonic_d",
    "inter_d",
    "intra_d",
    "knn_radii",
    "load_pool",
    "load_profile_spec",
    "metric_d",
    "pairwise_distances",
    "pairwise_matrix",
    "quality_rows",
    "quota_plan",
    "read_embeddings",
    "round_half_away",
    "sample_generator",
    "sample_real",
    "search",
    "select_best",
    "subsample_rows",
    "uniobjective_search",
    "write_embeddings",
]
