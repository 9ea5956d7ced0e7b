"""Per-hazard vector databases with exact top-l cosine search."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .chunking import Chunk
from .embeddings import EmbeddingProvider
from .hazards import HAZARD_CATEGORIES, validate_hazard


class ZeroVectorError(ValueError):
    """Raised when a zero-norm vector makes cosine similarity undefined."""


class DimensionMismatchError(ValueError):
    """Raised when vector dimensions disagree."""


class DuplicateChunkIdError(ValueError):
    """Raised when two chunks with the same id enter an index."""


def cosine(a, b) -> float:
    """Normalized inner product of two non-zero vectors, in [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise DimensionMismatchError(f"incompatible shapes {va.shape} vs {vb.shape}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero vectors")
    return float(np.dot(va, vb) / (na * nb))


@dataclass(frozen=True)
class VectorRecord:
    chunk: Chunk
    vector: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorRecord):
            return NotImplemented
        return self.chunk == other.chunk and np.array_equal(self.vector, other.vector)


class HazardDatabase:
    """Immutable store of (chunk, float32 vector) pairs for one hazard."""

    def __init__(self, hazard_type: str, chunks: list[Chunk], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] != len(chunks):
            raise DimensionMismatchError(
                f"vectors shape {vectors.shape} does not match {len(chunks)} chunks"
            )
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        if len(chunks) and not norms.all():
            bad = chunks[int(np.argmin(norms))].id
            raise ZeroVectorError(f"zero-norm embedding for chunk {bad!r}")
        seen: set[str] = set()
        for chunk in chunks:
            if chunk.id in seen:
                raise DuplicateChunkIdError(f"duplicate chunk id: {chunk.id!r}")
            seen.add(chunk.id)
        self.hazard_type = validate_hazard(hazard_type)
        self.chunks = list(chunks)
        self.vectors = vectors
        self._norms = norms
        self._mat64: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1]) if self.vectors.ndim == 2 else 0

    @property
    def records(self) -> list[VectorRecord]:
        return [VectorRecord(c, v) for c, v in zip(self.chunks, self.vectors)]

    def _matrix64(self) -> np.ndarray:
        if self._mat64 is None:
            self._mat64 = self.vectors.astype(np.float64)
        return self._mat64

    def __eq__(self, other) -> bool:
        if not isinstance(other, HazardDatabase):
            return NotImplemented
        return (
            self.hazard_type == other.hazard_type
            and self.chunks == other.chunks
            and np.array_equal(self.vectors, other.vectors)
        )


@dataclass(eq=False)
class CorpusIndex:
    """One vector database per hazard category, all sharing an embedder."""

    databases: dict[str, HazardDatabase]
    embedder_id: str
    dim: int
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def __post_init__(self):
        for hazard, db in self.databases.items():
            validate_hazard(hazard)
            if db.hazard_type != hazard:
                raise ValueError(f"database keyed {hazard!r} holds hazard {db.hazard_type!r}")
            if len(db) and db.dim != self.dim:
                raise DimensionMismatchError(
                    f"database {hazard} has dim {db.dim}, index dim {self.dim}"
                )

    @property
    def total_chunks(self) -> int:
        return sum(len(db) for db in self.databases.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return (
            self.embedder_id == other.embedder_id
            and self.dim == other.dim
            and self.created_at == other.created_at
            and self.databases == other.databases
        )


def build_index(
    chunks: list[Chunk],
    provider: EmbeddingProvider,
    created_at: str | None = None,
) -> CorpusIndex:
    """Embed chunks once each and partition them into per-hazard databases."""
    seen: set[str] = set()
    for chunk in chunks:
        if chunk.id in seen:
            raise DuplicateChunkIdError(f"duplicate chunk id: {chunk.id!r}")
        seen.add(chunk.id)
        validate_hazard(chunk.hazard_type)

    vectors = provider.embed_batch([c.text for c in chunks]) if chunks else []
    by_hazard: dict[str, tuple[list[Chunk], list[np.ndarray]]] = {}
    for chunk, vec in zip(chunks, vectors):
        vec = np.asarray(vec, dtype=np.float32)
        if vec.shape != (provider.dim,):
            raise DimensionMismatchError(
                f"embedding for chunk {chunk.id!r} has shape {vec.shape}, expected ({provider.dim},)"
            )
        group = by_hazard.setdefault(chunk.hazard_type, ([], []))
        group[0].append(chunk)
        group[1].append(vec)

    databases = {
        hazard: HazardDatabase(hazard, group[0], np.vstack(group[1]))
        for hazard in HAZARD_CATEGORIES
        if (group := by_hazard.get(hazard)) is not None
    }
    kwargs = {"created_at": created_at} if created_at is not None else {}
    return CorpusIndex(databases=databases, embedder_id=provider.identifier, dim=provider.dim, **kwargs)


def coarse_search(db: HazardDatabase, query, l: int) -> list[tuple[Chunk, float]]:
    """Exact top-l records by cosine, score descending, ties by chunk id.

    Returns min(l, len(db)) pairs. Matches the brute-force full-sort oracle
    exactly (same tie rule) for databases of at least up to 10,000 records.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    if l == 0 or len(db) == 0:
        return []
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != db.dim:
        raise DimensionMismatchError(f"query dim {q.shape} does not match index dim {db.dim}")
    qnorm = np.linalg.norm(q)
    if qnorm == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero query")
    scores = (db._matrix64() @ q) / (db._norms * qnorm)
    order = sorted(range(len(db)), key=lambda i: (-scores[i], db.chunks[i].id))
    return [(db.chunks[i], float(scores[i])) for i in order[:l]]


def unified_coarse_search(index: CorpusIndex, query, l: int) -> list[tuple[Chunk, float]]:
    """Top-l over all hazards merged, as if searching one unified database."""
    merged: list[tuple[Chunk, float]] = []
    for hazard in HAZARD_CATEGORIES:
        db = index.databases.get(hazard)
        if db is not None:
            merged.extend(coarse_search(db, query, l))
    merged.sort(key=lambda pair: (-pair[1], pair[0].id))
    return merged[:l]
