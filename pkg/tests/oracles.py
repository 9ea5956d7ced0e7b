"""Independent brute-force oracles used by unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from hazardrag.vecstore import HazardDatabase, cosine


def brute_force_top_ids(db: HazardDatabase, query, l: int) -> list[str]:
    """Full sort by per-record cosine, score desc then chunk id asc."""
    scored = [
        (cosine(record.vector, query), record.chunk.id) for record in db.records
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [chunk_id for _, chunk_id in scored[: min(l, len(scored))]]


def random_database(
    rng: np.random.Generator,
    hazard: str,
    size: int,
    dim: int,
    duplicate_fraction: float = 0.0,
) -> HazardDatabase:
    """A database of random unit-ish vectors; optionally with duplicated rows
    (sampled with replacement from a small pool) to force exact score ties."""
    from hazardrag.chunking import Chunk

    if duplicate_fraction > 0.0 and size > 4:
        pool = rng.standard_normal((max(2, size // 4), dim))
        rows = pool[rng.integers(0, pool.shape[0], size=size)]
    else:
        rows = rng.standard_normal((size, dim))
    vectors = rows.astype(np.float32)
    # shuffled ids make the tie rule observable
    order = rng.permutation(size)
    chunks = [
        Chunk(
            id=f"c{order[i]:05d}",
            text=f"record {i}",
            hazard_type=hazard,
            source={"doc_id": "rand"},
            strategy="paragraph",
        )
        for i in range(size)
    ]
    return HazardDatabase(hazard, chunks, vectors)
