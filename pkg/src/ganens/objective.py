"""Genome evaluation: quota-sampled unions, fidelity delta, and overlap Delta.

A genome is a binary inclusion vector over the pool. Its fidelity objective
(delta, "Intra-d") is the metric between the real set and a union drawn
from the selected generators under per-generator quotas that sum to the
real-set size, so the score stays comparable across ensemble sizes. Its
overlap objective (Delta, "Inter-d") is the mean pairwise metric over the
selected generators' sets, read from a precomputed symmetric matrix.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError, ShortfallWarning
from .metrics import (
    MetricConfig,
    MetricKind,
    RadiusProfile,
    counts_from_cross,
    frechet_distance,
    gaussian_summary,
    harmonic_d,
    knn_radii,
    metric_d,
    pairwise_distances,
)
from .store import EmbeddingSet, Pool
from .util import readonly, seeded_stream, worker_count


@dataclass(frozen=True)
class EnsembleGenome:
    """Binary inclusion vector over a pool's canonically ordered generators."""

    bits: tuple[int, ...]
    pool_ref: str = ""

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ParameterError("genome bits must be 0 or 1")
        if sum(bits) < 1:
            raise ParameterError("empty ensembles are invalid; repair before evaluation")
        object.__setattr__(self, "bits", bits)

    @property
    def member_count(self) -> int:
        return sum(self.bits)

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @classmethod
    def from_indices(cls, indices, size: int, pool_ref: str = "") -> "EnsembleGenome":
        picked = set(int(i) for i in indices)
        if not all(0 <= i < size for i in picked):
            raise ParameterError(f"generator index out of range for pool of size {size}")
        return cls(tuple(1 if i in picked else 0 for i in range(size)), pool_ref)


@dataclass(frozen=True)
class ObjectiveVector:
    """The (delta, Delta) pair for one genome plus the metric it was scored with."""

    intra: float
    inter: float
    member_count: int
    metric: MetricConfig

    def __post_init__(self) -> None:
        if not (np.isfinite(self.intra) and np.isfinite(self.inter)):
            raise ParameterError(f"objectives must be finite, got ({self.intra}, {self.inter})")

    def effective(self) -> tuple[float, float]:
        """Objectives oriented so the first is maximized and the second minimized.

        For a lower-is-better metric (Frechet) both axes are negated: small
        intra-FID means high fidelity, and large pairwise FID means the
        members differ, i.e. low redundancy.
        """
        if self.metric.orientation.value == "higher":
            return (self.intra, self.inter)
        return (-self.intra, -self.inter)


@dataclass(frozen=True)
class PairwiseMatrix:
    """Symmetrized pairwise metric values over a pool, computed once and reused."""

    values: np.ndarray
    ids: tuple[str, ...]
    pool_ref: str
    metric: MetricConfig
    seed: int
    sample_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", readonly(np.asarray(self.values, dtype=np.float64)))

    def entry(self, i: int, j: int) -> float:
        return float(self.values[i, j])

    def write_csv(self, dest: str | Path, provenance: dict | None = None) -> None:
        """CSV with a generator-id header row plus a JSON metadata sidecar."""
        path = Path(dest)
        lines = ["id," + ",".join(self.ids)]
        for gid, row in zip(self.ids, self.values):
            lines.append(gid + "," + ",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        sidecar = {
            "metric": {
                "kind": self.metric.kind.value,
                "k": self.metric.k,
                "standardize": self.metric.standardize,
            },
            "seed": self.seed,
            "sample_sizes": {gid: n for gid, n in zip(self.ids, self.sample_sizes)},
            "pool_ref": self.pool_ref,
        }
        if provenance:
            sidecar["provenance"] = provenance
        path.with_suffix(path.suffix + ".meta.json").write_text(
            json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
        )


def quota_plan(genome: EnsembleGenome, total: int) -> list[tuple[int, int]]:
    """Per-generator sampling quotas that sum exactly to ``total``.

    Each selected generator gets floor(total/n); the remainder goes one each
    to the earliest selected generators in canonical pool order.
    """
    selected = genome.indices()
    n = len(selected)
    if total < n:
        raise ParameterError(f"total {total} is smaller than ensemble size {n}")
    base, extra = divmod(total, n)
    return [(idx, base + (1 if pos < extra else 0)) for pos, idx in enumerate(selected)]


def _check_pool(genome: EnsembleGenome, pool: Pool) -> None:
    if len(genome.bits) != pool.size:
        raise ParameterError(
            f"genome length {len(genome.bits)} does not match pool size {pool.size}"
        )
    if genome.pool_ref and genome.pool_ref != pool.ref:
        raise ParameterError("genome was built against a different pool")


def subsample_rows(dataset: EmbeddingSet, size: int, seed: int, tag: str) -> EmbeddingSet:
    """Uniform without-replacement row sample, seeded by (seed, tag).

    Returns the set unchanged when ``size`` covers all rows, so identical
    inputs stay identical regardless of the seed.
    """
    if size >= dataset.rows:
        return dataset
    if size < 1:
        raise ParameterError(f"subsample size must be >= 1, got {size}")
    rng = seeded_stream(seed, tag, channel=1)
    picked = np.sort(rng.permutation(dataset.rows)[:size])
    return EmbeddingSet(dataset.data[picked], source_id=f"{dataset.source_id}[{size}]")


def build_union(genome: EnsembleGenome, pool: Pool, total: int, seed: int) -> EmbeddingSet:
    """Quota-sampled union of the selected generators' embeddings.

    Rows are drawn without replacement from each selected generator using a
    stream seeded by (seed, generator id), then concatenated in canonical
    order. A generator holding fewer rows than its quota contributes all of
    them and a ShortfallWarning is emitted.
    """
    _check_pool(genome, pool)
    parts = []
    for idx, quota in quota_plan(genome, total):
        record, dataset = pool.members[idx]
        take = min(quota, dataset.rows)
        if take < quota:
            warnings.warn(
                f"generator '{record.id}' holds {dataset.rows} rows but quota is {quota}; "
                f"union will be short by {quota - take}",
                ShortfallWarning,
                stacklevel=2,
            )
        if take == dataset.rows:
            parts.append(dataset.data)
        else:
            rng = seeded_stream(seed, record.id, channel=0)
            picked = np.sort(rng.permutation(dataset.rows)[:take])
            parts.append(dataset.data[picked])
    members = "+".join(pool.members[i][0].id for i in genome.indices())
    return EmbeddingSet(np.concatenate(parts, axis=0), source_id=f"union({members})")


def intra_d(
    genome: EnsembleGenome,
    pool: Pool,
    cfg: MetricConfig,
    seed: int,
    total: int | None = None,
    radii: RadiusProfile | None = None,
) -> float:
    """Metric between the real set and the genome's quota-sampled union."""
    budget = pool.real.rows if total is None else total
    union = build_union(genome, pool, budget, seed)
    return metric_d(pool.real, union, cfg, radii=radii)


def pairwise_matrix(
    pool: Pool,
    cfg: MetricConfig,
    sample_per_generator: int | None = None,
    seed: int = 0,
    max_workers: int | None = None,
) -> PairwiseMatrix:
    """Symmetric matrix of pairwise metric values between generator sets.

    Entry (i, j) averages both argument orders of the metric over seeded
    subsamples, which reproduces the ordered-pair mean exactly while halving
    the work. The default subsample size is the smallest generator size,
    capped at the real-set size.
    """
    n = pool.size
    if sample_per_generator is None:
        sample_per_generator = min(min(es.rows for _, es in pool.members), pool.real.rows)
    if sample_per_generator < 1:
        raise ParameterError("sample_per_generator must be >= 1")
    subs = [
        subsample_rows(es, min(sample_per_generator, es.rows), seed, record.id)
        for record, es in pool.members
    ]
    values = np.zeros((n, n), dtype=np.float64)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    # Per-set state (k-NN radii, Gaussian moments) is computed once; each
    # cross-distance matrix serves both argument orders via its transpose.
    if cfg.kind is MetricKind.DENSITY_COVERAGE and not cfg.standardize:
        profiles = [knn_radii(s, cfg.k) for s in subs]

        def entry(pair: tuple[int, int]) -> float:
            i, j = pair
            cross = pairwise_distances(subs[i].data, subs[j].data)
            forward = harmonic_d(*counts_from_cross(cross, profiles[i].radii, cfg.k))
            backward = harmonic_d(*counts_from_cross(cross.T, profiles[j].radii, cfg.k))
            return (forward + backward) / 2.0

    elif cfg.kind is MetricKind.FRECHET and not cfg.standardize:
        summaries = [gaussian_summary(s) for s in subs]

        def entry(pair: tuple[int, int]) -> float:
            i, j = pair
            return (
                frechet_distance(summaries[i], summaries[j])
                + frechet_distance(summaries[j], summaries[i])
            ) / 2.0

    else:

        def entry(pair: tuple[int, int]) -> float:
            i, j = pair
            return (metric_d(subs[i], subs[j], cfg) + metric_d(subs[j], subs[i], cfg)) / 2.0

    workers = worker_count(max_workers)
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(entry, pairs))
    else:
        results = [entry(p) for p in pairs]
    for (i, j), value in zip(pairs, results):
        values[i, j] = value
        values[j, i] = value
    return PairwiseMatrix(
        values=values,
        ids=pool.ids,
        pool_ref=pool.ref,
        metric=cfg,
        seed=seed,
        sample_sizes=tuple(s.rows for s in subs),
    )


def inter_d(genome: EnsembleGenome, matrix: PairwiseMatrix) -> float:
    """Mean pairwise metric over all distinct selected pairs; 0 for singletons.

    With symmetrized entries the mean over ordered pairs equals the mean
    over unordered pairs. A singleton has no pairs, so the mean is
    undefined there; zero keeps singletons admissible by convention.
    """
    selected = genome.indices()
    n = len(selected)
    if n < 2:
        return 0.0
    block = matrix.values[np.ix_(selected, selected)]
    return float((block.sum() - np.trace(block)) / (n * (n - 1)))


class EnsembleEvaluator:
    """Memoizing objective evaluator bound to one (pool, metric, seed) triple.

    The pairwise matrix is built lazily on first use and the real-set radius
    profile is precomputed once. Results are cached by genome bits; cached
    and uncached evaluations are identical, and concurrent inserts of the
    same key are harmless because values are deterministic.
    """

    def __init__(
        self,
        pool: Pool,
        cfg: MetricConfig | None = None,
        seed: int = 0,
        total: int | None = None,
        sample_per_generator: int | None = None,
        memoize: bool = True,
        max_workers: int | None = None,
    ) -> None:
        self.pool = pool
        self.cfg = cfg if cfg is not None else MetricConfig()
        self.seed = int(seed)
        self.total = pool.real.rows if total is None else int(total)
        self.sample_per_generator = sample_per_generator
        self.memoize = memoize
        self.max_workers = max_workers
        self._cache: dict[tuple[int, ...], ObjectiveVector] = {}
        self._matrix: PairwiseMatrix | None = None
        self._radii: RadiusProfile | None = None
        if self.cfg.kind is MetricKind.DENSITY_COVERAGE and not self.cfg.standardize:
            self._radii = knn_radii(pool.real, self.cfg.k)

    @property
    def matrix(self) -> PairwiseMatrix:
        if self._matrix is None:
            self._matrix = pairwise_matrix(
                self.pool,
                self.cfg,
                sample_per_generator=self.sample_per_generator,
                seed=self.seed,
                max_workers=self.max_workers,
            )
        return self._matrix

    def evaluate(self, genome: EnsembleGenome) -> ObjectiveVector:
        key = genome.bits
        if self.memoize:
            cached = self._cache.get(key)
            if cached is not None:
                return cached
        _check_pool(genome, self.pool)
        intra = intra_d(
            genome, self.pool, self.cfg, self.seed, total=self.total, radii=self._radii
        )
        inter = inter_d(genome, self.matrix)
        result = ObjectiveVector(
            intra=float(intra),
            inter=float(inter),
            member_count=genome.member_count,
            metric=self.cfg,
        )
        if self.memoize:
            self._cache[key] = result
        return result

    __call__ = evaluate
