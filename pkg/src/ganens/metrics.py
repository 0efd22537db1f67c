"""Distribution-quality metrics between two embedding sets.

Two metric families are supported. Density and coverage build k-NN balls
around every reference point and count which candidate points fall inside
them (higher is better); their harmonic combination ``2*dns*cvg/(dns+cvg)``
is the default scalar metric. The Frechet distance compares Gaussian moment
summaries of the two sets (lower is better) and serves as the alternative
metric for ablations.

All ball-membership tests use closed balls (distance <= radius), so a set
compared against itself always attains coverage 1 even when it contains
duplicate points. Distances are exact Euclidean, computed in float64 by
direct differencing so the optimized path agrees bit-for-bit with a naive
all-pairs oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericError, ParameterError
from .store import EmbeddingSet
from .util import readonly

EIGENVALUE_CLAMP = 1e-10
DEFAULT_K = 5


class MetricKind(str, Enum):
    DENSITY_COVERAGE = "dnc"
    FRECHET = "fid"


class Orientation(str, Enum):
    HIGHER_IS_BETTER = "higher"
    LOWER_IS_BETTER = "lower"


@dataclass(frozen=True)
class MetricConfig:
    """Which metric to run and with what knobs.

    ``k`` is the neighbor count for density/coverage and is ignored by the
    Frechet kind. ``standardize`` rescales both sets by the reference's
    per-dimension mean and standard deviation before comparing (off by
    default: the embedding backbone already defines the geometry).
    """

    kind: MetricKind = MetricKind.DENSITY_COVERAGE
    k: int = DEFAULT_K
    standardize: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MetricKind(self.kind))
        if self.k < 1:
            raise ParameterError(f"neighbor count k must be >= 1, got {self.k}")

    @property
    def orientation(self) -> Orientation:
        if self.kind is MetricKind.DENSITY_COVERAGE:
            return Orientation.HIGHER_IS_BETTER
        return Orientation.LOWER_IS_BETTER


@dataclass(frozen=True)
class RadiusProfile:
    """Per-point k-th-nearest-neighbor distances within one reference set."""

    reference_id: str
    k: int
    radii: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "radii", readonly(np.asarray(self.radii, dtype=np.float64)))


@dataclass(frozen=True)
class GaussianSummary:
    """Mean vector and unbiased covariance of one embedding set."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", readonly(np.asarray(self.mean, dtype=np.float64)))
        object.__setattr__(
            self, "covariance", readonly(np.asarray(self.covariance, dtype=np.float64))
        )

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def _as_matrix(x: EmbeddingSet | np.ndarray) -> np.ndarray:
    data = x.data if isinstance(x, EmbeddingSet) else np.asarray(x)
    return np.ascontiguousarray(data, dtype=np.float64)


def _source_id(x: EmbeddingSet | np.ndarray) -> str:
    return x.source_id if isinstance(x, EmbeddingSet) else ""


def pairwise_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance matrix between the rows of x and y.

    Accumulates squared differences one dimension at a time, which avoids
    materializing an (N, M, D) tensor and keeps exact zeros for identical
    rows (no norm-plus-dot cancellation).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    out = np.zeros((x.shape[0], y.shape[0]), dtype=np.float64)
    tmp = np.empty_like(out)
    for d in range(x.shape[1]):
        np.subtract.outer(x[:, d], y[:, d], out=tmp)
        tmp *= tmp
        out += tmp
    return np.sqrt(out, out=out)


def knn_radii(reference: EmbeddingSet | np.ndarray, k: int) -> RadiusProfile:
    """Distance from each point to its k-th nearest other point in the same set.

    Requires 1 <= k < N. Ties in neighbor ranking are value ties, so the
    k-th order statistic is well defined regardless of index order.
    """
    ref = _as_matrix(reference)
    n = ref.shape[0]
    if k < 1 or k >= n:
        raise ParameterError(f"k must satisfy 1 <= k < N, got k={k} with N={n}")
    dists = pairwise_distances(ref, ref)
    np.fill_diagonal(dists, np.inf)
    radii = np.partition(dists, k - 1, axis=1)[:, k - 1]
    return RadiusProfile(reference_id=_source_id(reference), k=k, radii=radii)


def density_coverage(
    reference: EmbeddingSet | np.ndarray,
    candidate: EmbeddingSet | np.ndarray,
    k: int,
    radii: RadiusProfile | None = None,
) -> tuple[float, float]:
    """Density and coverage of the candidate set against the reference manifold.

    Density is the expected number of reference k-NN balls containing a
    candidate point, divided by k; it can exceed 1. Coverage is the fraction
    of reference points whose ball contains at least one candidate point.
    Pass a precomputed ``radii`` profile to skip the within-reference k-NN
    pass when evaluating many candidates against one reference.
    """
    ref = _as_matrix(reference)
    cand = _as_matrix(candidate)
    if ref.shape[1] != cand.shape[1]:
        raise ParameterError(
            f"dimension mismatch: reference D={ref.shape[1]}, candidate D={cand.shape[1]}"
        )
    if radii is None:
        radii = knn_radii(reference, k)
    elif radii.k != k or radii.radii.shape[0] != ref.shape[0]:
        raise ParameterError("radius profile does not match this reference set and k")
    cross = pairwise_distances(ref, cand)
    return counts_from_cross(cross, radii.radii, k)


def counts_from_cross(cross: np.ndarray, radii_values: np.ndarray, k: int) -> tuple[float, float]:
    """Density and coverage from a precomputed reference-by-candidate distance matrix."""
    inside = cross <= radii_values[:, None]
    dns = float(inside.sum()) / (k * cross.shape[1])
    cvg = float(inside.any(axis=1).mean())
    return dns, cvg


def density(
    reference: EmbeddingSet | np.ndarray, candidate: EmbeddingSet | np.ndarray, k: int
) -> float:
    return density_coverage(reference, candidate, k)[0]


def coverage(
    reference: EmbeddingSet | np.ndarray, candidate: EmbeddingSet | np.ndarray, k: int
) -> float:
    return density_coverage(reference, candidate, k)[1]


def harmonic_d(dns: float, cvg: float) -> float:
    """Harmonic combination 2*dns*cvg/(dns+cvg); zero when both terms are zero."""
    if dns < 0 or cvg < 0:
        raise ParameterError(f"harmonic_d needs nonnegative inputs, got ({dns}, {cvg})")
    total = dns + cvg
    if total == 0:
        return 0.0
    return 2.0 * dns * cvg / total


def gaussian_summary(dataset: EmbeddingSet | np.ndarray) -> GaussianSummary:
    """Column mean and unbiased (N-1) covariance, symmetrized."""
    x = _as_matrix(dataset)
    if x.shape[0] < 2:
        raise ParameterError(f"need at least 2 rows for a covariance, got {x.shape[0]}")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    cov = (cov + cov.T) / 2.0
    return GaussianSummary(mean=mean, covariance=cov)


def _clamped_eigh(matrix: np.ndarray, context: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed for {context}: {exc}") from exc
    if not np.isfinite(values).all():
        raise NumericError(f"eigendecomposition produced non-finite values for {context}")
    values = np.where(values < EIGENVALUE_CLAMP, 0.0, values)
    return values, vectors


def frechet_distance(a: GaussianSummary, b: GaussianSummary) -> float:
    """Frechet distance between two Gaussian summaries.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with the matrix
    square root evaluated through the eigendecomposition of the symmetrized
    product S_a^(1/2) S_b S_a^(1/2). Small eigenvalues are clamped to zero
    and the result is clamped to be nonnegative.
    """
    if a.dim != b.dim:
        raise ParameterError(f"dimension mismatch: {a.dim} vs {b.dim}")
    vals_a, vecs_a = _clamped_eigh(a.covariance, "covariance of first summary")
    root_a = (vecs_a * np.sqrt(vals_a)) @ vecs_a.T
    product = root_a @ b.covariance @ root_a
    product = (product + product.T) / 2.0
    vals_p, _ = _clamped_eigh(product, "covariance product")
    diff = a.mean - b.mean
    value = (
        float(diff @ diff)
        + float(np.trace(a.covariance))
        + float(np.trace(b.covariance))
        - 2.0 * float(np.sqrt(vals_p).sum())
    )
    return max(0.0, value)


def _standardized(ref: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = ref.mean(axis=0)
    scale = ref.std(axis=0, ddof=0)
    scale = np.where(scale == 0, 1.0, scale)
    return (ref - mean) / scale, (cand - mean) / scale


def metric_d(
    reference: EmbeddingSet | np.ndarray,
    candidate: EmbeddingSet | np.ndarray,
    cfg: MetricConfig,
    radii: RadiusProfile | None = None,
) -> float:
    """Scalar distribution-quality metric between reference and candidate.

    The first argument is always the reference whose manifold defines the
    k-NN balls; density/coverage is asymmetric in its arguments. A
    precomputed ``radii`` profile is ignored when ``cfg.standardize`` is
    set, since standardization changes the reference geometry.
    """
    ref = _as_matrix(reference)
    cand = _as_matrix(candidate)
    if cfg.standardize:
        ref, cand = _standardized(ref, cand)
        radii = None
    if cfg.kind is MetricKind.DENSITY_COVERAGE:
        dns, cvg = density_coverage(ref, cand, cfg.k, radii)
        return harmonic_d(dns, cvg)
    return frechet_distance(gaussian_summary(ref), gaussian_summary(cand))
