"""Deterministic random streams.

All randomness in the library flows through Philox, a counter-based 64-bit
generator. Independent streams are derived from (seed, stream indices), so
parallel or per-sample sampling is reproducible regardless of evaluation
order: stream (seed, j) is the same bit sequence no matter who asks for it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng", "derive_seeds"]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a Generator for the stream identified by (seed, *stream)."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def derive_seeds(seed: int, count: int) -> list[int]:
    """Derive `count` child seeds from a parent seed (stable, collision-free)."""
    ss = np.random.SeedSequence(entropy=int(seed))
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]
