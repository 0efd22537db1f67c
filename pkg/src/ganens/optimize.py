"""Binary multi-objective subset search and Pareto-front selection.

Three candidate generators are available: exhaustive enumeration (small
pools only), uniform random sampling, and an elitist non-dominated-sorting
evolutionary loop. Every evaluated genome is archived; the front is always
extracted over the full archive, not just the final population. The
evolutionary loop never re-evaluates a genome it has already seen, so its
budget counts unique evaluations and the search degenerates gracefully into
full enumeration once the budget covers the whole space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError
from .metrics import Orientation
from .objective import EnsembleGenome, ObjectiveVector, quota_plan
from .store import Pool

EXHAUSTIVE_CAP = 20


class Algorithm(str, Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"
    EVOLUTIONARY = "nsga2"


@dataclass(frozen=True)
class SearchConfig:
    """Search algorithm and budget knobs; all randomness flows from ``seed``."""

    algorithm: Algorithm = Algorithm.EVOLUTIONARY
    budget: int = 1000
    population: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.budget < 1:
            raise ParameterError(f"budget must be >= 1, got {self.budget}")
        if self.population < 2:
            raise ParameterError(f"population must be >= 2, got {self.population}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ParameterError(f"crossover_rate must lie in [0, 1], got {self.crossover_rate}")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ParameterError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if self.algorithm is Algorithm.EVOLUTIONARY and self.budget < self.population:
            raise ParameterError(
                f"budget {self.budget} must cover at least one population of {self.population}"
            )


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated entries, deduplicated by bits, sorted by descending effective delta."""

    entries: tuple[tuple[EnsembleGenome, ObjectiveVector], ...]
    orientation: Orientation

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SearchResult:
    """A Pareto front plus the archive of every evaluation, in order."""

    front: ParetoFront
    evaluations: tuple[tuple[EnsembleGenome, ObjectiveVector], ...]
    config: SearchConfig


@dataclass(frozen=True)
class SelectionManifest:
    """The chosen ensemble with its sampling quotas and provenance."""

    chosen: tuple[str, ...]
    quotas: dict[str, int]
    objectives: ObjectiveVector
    front_size: int
    total: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.chosen:
            raise ParameterError("selection must keep at least one generator")
        if sum(self.quotas.values()) != self.total:
            raise ParameterError("quotas must sum to the configured total")


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """Pareto dominance: at least as good on both axes, strictly better on one."""
    if a.metric.orientation is not b.metric.orientation:
        raise ParameterError("cannot compare objective vectors with different orientations")
    a_intra, a_inter = a.effective()
    b_intra, b_inter = b.effective()
    return a_intra >= b_intra and a_inter <= b_inter and (a_intra > b_intra or a_inter < b_inter)


def extract_front(
    evaluated: list[tuple[EnsembleGenome, ObjectiveVector]]
) -> ParetoFront:
    """Non-dominated subset of an evaluation archive."""
    if not evaluated:
        raise ParameterError("cannot extract a front from an empty evaluation list")
    unique: dict[tuple[int, ...], tuple[EnsembleGenome, ObjectiveVector]] = {}
    for genome, objectives in evaluated:
        unique.setdefault(genome.bits, (genome, objectives))
    entries = list(unique.values())
    keep = []
    for i, (_, obj_i) in enumerate(entries):
        if not any(dominates(obj_j, obj_i) for j, (_, obj_j) in enumerate(entries) if j != i):
            keep.append(entries[i])
    keep.sort(key=lambda e: (-e[1].effective()[0], e[1].effective()[1], e[0].bits))
    orientation = evaluated[0][1].metric.orientation
    return ParetoFront(entries=tuple(keep), orientation=orientation)


def _bits_from_mask(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(n))


def _random_bits(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    bits = rng.integers(0, 2, size=n)
    if not bits.any():
        bits[int(rng.integers(n))] = 1
    return tuple(int(b) for b in bits)


def _novel_bits(
    bits: tuple[int, ...],
    rng: np.random.Generator,
    seen: set[tuple[int, ...]],
) -> tuple[int, ...] | None:
    """Steer a candidate away from already-evaluated genomes.

    Tries escalating random flips around the duplicate, then uniform
    redraws; for small pools the remaining genomes are enumerated exactly.
    Returns None once every nonempty genome has been seen.
    """
    if bits not in seen:
        return bits
    n = len(bits)
    space = (1 << n) - 1
    if len(seen) >= space:
        return None
    for flips in (1, 2, 4, 8):
        for _ in range(16):
            cand = list(bits)
            for pos in rng.integers(0, n, size=flips):
                cand[pos] ^= 1
            if sum(cand) == 0:
                cand[int(rng.integers(n))] = 1
            t = tuple(cand)
            if t not in seen:
                return t
    if n <= EXHAUSTIVE_CAP:
        seen_masks = {sum(b << i for i, b in enumerate(s)) for s in seen}
        remaining = [m for m in range(1, space + 1) if m not in seen_masks]
        return _bits_from_mask(remaining[int(rng.integers(len(remaining)))], n)
    for _ in range(10_000):
        t = _random_bits(rng, n)
        if t not in seen:
            return t
    return None


def _rank_and_crowd(objectives: list[ObjectiveVector]) -> tuple[np.ndarray, np.ndarray]:
    """Fast non-dominated sort ranks plus per-front crowding distances."""
    m = len(objectives)
    ranks = np.zeros(m, dtype=np.int64)
    dominated_by = [0] * m
    dominating: list[list[int]] = [[] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if dominates(objectives[i], objectives[j]):
                dominating[i].append(j)
                dominated_by[j] += 1
            elif dominates(objectives[j], objectives[i]):
                dominating[j].append(i)
                dominated_by[i] += 1
    current = [i for i in range(m) if dominated_by[i] == 0]
    rank = 0
    while current:
        nxt = []
        for i in current:
            ranks[i] = rank
            for j in dominating[i]:
                dominated_by[j] -= 1
                if dominated_by[j] == 0:
                    nxt.append(j)
        current = nxt
        rank += 1

    crowd = np.zeros(m, dtype=np.float64)
    points = np.array([o.effective() for o in objectives], dtype=np.float64)
    for r in range(int(ranks.max()) + 1):
        members = np.flatnonzero(ranks == r)
        if len(members) <= 2:
            crowd[members] = np.inf
            continue
        for axis in range(2):
            order = members[np.argsort(points[members, axis], kind="stable")]
            lo, hi = points[order[0], axis], points[order[-1], axis]
            crowd[order[0]] = np.inf
            crowd[order[-1]] = np.inf
            if hi > lo:
                gaps = (points[order[2:], axis] - points[order[:-2], axis]) / (hi - lo)
                crowd[order[1:-1]] += gaps
    return ranks, crowd


def _evolutionary(n: int, evaluate, cfg: SearchConfig) -> None:
    """Elitist NSGA-II loop over binary genomes with a no-revisit archive."""
    rng = np.random.default_rng(cfg.seed)
    mutation = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / n
    seen: set[tuple[int, ...]] = set()

    def admit(bits: tuple[int, ...]) -> tuple[tuple[int, ...], ObjectiveVector] | None:
        novel = _novel_bits(bits, rng, seen)
        if novel is None:
            return None
        seen.add(novel)
        return (novel, evaluate(novel))

    parents: list[tuple[tuple[int, ...], ObjectiveVector]] = []
    while len(parents) < min(cfg.population, cfg.budget):
        member = admit(_random_bits(rng, n))
        if member is None:
            return
        parents.append(member)
    evaluated = len(parents)

    while evaluated < cfg.budget:
        ranks, crowd = _rank_and_crowd([obj for _, obj in parents])

        def tournament() -> tuple[int, ...]:
            i, j = rng.integers(len(parents), size=2)
            if ranks[i] != ranks[j]:
                winner = i if ranks[i] < ranks[j] else j
            elif crowd[i] != crowd[j]:
                winner = i if crowd[i] > crowd[j] else j
            else:
                winner = i if rng.random() < 0.5 else j
            return parents[winner][0]

        offspring: list[tuple[tuple[int, ...], ObjectiveVector]] = []
        goal = min(cfg.population, cfg.budget - evaluated)
        while len(offspring) < goal:
            p1 = np.array(tournament(), dtype=np.int64)
            p2 = np.array(tournament(), dtype=np.int64)
            if rng.random() < cfg.crossover_rate:
                mask = rng.random(n) < 0.5
                child = np.where(mask, p1, p2)
            else:
                child = p1.copy()
            child = child ^ (rng.random(n) < mutation)
            if not child.any():
                child[int(rng.integers(n))] = 1
            member = admit(tuple(int(b) for b in child))
            if member is None:
                return
            offspring.append(member)
        evaluated += len(offspring)

        # Elitist environmental selection over parents plus offspring.
        combined = parents + offspring
        ranks, crowd = _rank_and_crowd([obj for _, obj in combined])
        order = sorted(range(len(combined)), key=lambda i: (ranks[i], -crowd[i]))
        parents = [combined[i] for i in order[: cfg.population]]


def search(pool: Pool, evaluator, cfg: SearchConfig) -> SearchResult:
    """Run the configured candidate generation and archive every evaluation.

    The returned front covers the whole archive. Exhaustive search requires
    a pool of at most 2^20 genomes.
    """
    n = pool.size
    if n < 1:
        raise ParameterError("pool has no generators")
    evaluations: list[tuple[EnsembleGenome, ObjectiveVector]] = []

    def evaluate_bits(bits: tuple[int, ...]) -> ObjectiveVector:
        genome = EnsembleGenome(bits, pool.ref)
        objectives = evaluator(genome)
        evaluations.append((genome, objectives))
        return objectives

    if cfg.algorithm is Algorithm.EXHAUSTIVE:
        if n > EXHAUSTIVE_CAP:
            raise ParameterError(
                f"exhaustive search is capped at {EXHAUSTIVE_CAP} generators, pool has {n}"
            )
        for mask in range(1, (1 << n)):
            evaluate_bits(_bits_from_mask(mask, n))
    elif cfg.algorithm is Algorithm.RANDOM:
        rng = np.random.default_rng(cfg.seed)
        for _ in range(cfg.budget):
            evaluate_bits(_random_bits(rng, n))
    else:
        _evolutionary(n, evaluate_bits, cfg)

    return SearchResult(front=extract_front(evaluations), evaluations=tuple(evaluations), config=cfg)


def _selection_key(entry: tuple[EnsembleGenome, ObjectiveVector]):
    genome, objectives = entry
    return (-objectives.effective()[0], genome.member_count, genome.bits)


def select_best(
    front: ParetoFront,
    pool: Pool,
    total: int | None = None,
    provenance: dict | None = None,
) -> SelectionManifest:
    """Pick the front entry with maximal effective delta and plan its quotas.

    Ties break toward fewer members, then the lexicographically smallest bit
    vector, biasing toward the cheaper ensemble.
    """
    if not front.entries:
        raise ParameterError("cannot select from an empty front")
    budget = pool.real.rows if total is None else int(total)
    genome, objectives = min(front.entries, key=_selection_key)
    quotas = {pool.members[i][0].id: q for i, q in quota_plan(genome, budget)}
    return SelectionManifest(
        chosen=tuple(pool.members[i][0].id for i in genome.indices()),
        quotas=quotas,
        objectives=objectives,
        front_size=len(front.entries),
        total=budget,
        provenance=provenance or {},
    )


def uniobjective_search(
    pool: Pool,
    evaluator,
    cfg: SearchConfig,
    total: int | None = None,
    provenance: dict | None = None,
) -> SelectionManifest:
    """Ablation: same candidate generation, selection by delta alone.

    The overlap objective is ignored at selection time; the argmax is taken
    over every evaluated genome, with the same member-count tie-breaking as
    the multi-objective rule.
    """
    result = search(pool, evaluator, cfg)
    budget = pool.real.rows if total is None else int(total)
    genome, objectives = min(result.evaluations, key=_selection_key)
    quotas = {pool.members[i][0].id: q for i, q in quota_plan(genome, budget)}
    return SelectionManifest(
        chosen=tuple(pool.members[i][0].id for i in genome.indices()),
        quotas=quotas,
        objectives=objectives,
        front_size=len(result.front.entries),
        total=budget,
        provenance=provenance or {},
    )
