"""Small shared helpers: deterministic RNG streams, worker caps, array locking."""
from __future__ import annotations

import hashlib
import os

import numpy as np

from .errors import ParameterError


def readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def seeded_stream(seed: int, tag: str, channel: int = 0) -> np.random.Generator:
    """Independent generator derived from (seed, tag, channel).

    The tag is hashed so streams stay stable across runs and do not depend
    on enumeration order.
    """
    digest = int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng((int(seed), digest, int(channel)))


def worker_count(requested: int | None = None) -> int:
    """Effective worker count, capped by the GANENS_THREADS environment variable."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("GANENS_THREADS")
    if cap is not None:
        try:
            cap_value = int(cap)
        except ValueError:
            raise ParameterError(f"GANENS_THREADS must be an integer, got {cap!r}") from None
        workers = min(workers, max(1, cap_value))
    return max(1, int(workers))
