import numpy as np
import pytest

from ganens import (
    EmbeddingSet,
    GeneratorProfile,
    GeneratorRecord,
    ModeSpec,
    Pool,
    canonical_fixture_path,
    emit_pool,
    load_pool,
    load_profile_spec,
)


def make_pool(sets: dict[str, np.ndarray], real: np.ndarray) -> Pool:
    """In-memory pool from raw matrices; ids double as model names."""
    members = []
    for gid in sorted(sets):
        es = EmbeddingSet(sets[gid], source_id=gid)
        members.append((GeneratorRecord(gid, gid, 0, f"{gid}.emb", es.rows), es))
    return Pool(real=EmbeddingSet(real, source_id="real"), members=tuple(members))


def four_modes(dim: int = 8, separation: float = 10.0) -> list[ModeSpec]:
    return [
        ModeSpec(center=np.eye(dim)[i] * separation, spread=1.0, weight=0.25)
        for i in range(4)
    ]


@pytest.fixture(scope="session")
def fixture_spec():
    return load_profile_spec(canonical_fixture_path())


@pytest.fixture(scope="session")
def fixture_pool(fixture_spec, tmp_path_factory):
    """The canonical mode-recovery pool, emitted at its own spec seed."""
    out = tmp_path_factory.mktemp("fixture_pool")
    manifest = emit_pool(
        list(fixture_spec.modes),
        fixture_spec.real_samples,
        list(fixture_spec.profiles),
        out,
        fixture_spec.seed,
    )
    return load_pool(manifest)


def ten_generator_profiles(dim: int = 8) -> list[GeneratorProfile]:
    """A 10-profile pool with fidelity, coverage, noise, and offset trade-offs."""
    return [
        GeneratorProfile("g0", (0,), samples=300),
        GeneratorProfile("g1", (1,), samples=300),
        GeneratorProfile("g2", (2,), samples=300),
        GeneratorProfile("g3", (3,), samples=300),
        GeneratorProfile("g4", (0, 1), samples=300),
        GeneratorProfile("g5", (2, 3), samples=300),
        GeneratorProfile("g6", (0, 1, 2, 3), samples=300),
        GeneratorProfile("g7", (0,), fidelity_noise=2.0, samples=300),
        GeneratorProfile("g8", (0, 1, 2, 3), offset=np.full(dim, 30.0), samples=300),
        GeneratorProfile("g9", (1,), samples=300),
    ]


@pytest.fixture(scope="session")
def toy10_pool(tmp_path_factory):
    out = tmp_path_factory.mktemp("toy10")
    manifest = emit_pool(four_modes(), 300, ten_generator_profiles(), out, 42)
    return load_pool(manifest)
