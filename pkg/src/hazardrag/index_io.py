"""Index persistence: JSON header + float32 vector blocks + chunk payload."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .chunking import chunk_from_dict, chunk_to_dict
from .vecstore import CorpusIndex, HazardDatabase

INDEX_FORMAT = "hazardrag-index"
INDEX_VERSION = 1


class IndexFormatError(RuntimeError):
    """Raised when an index file cannot be parsed."""


class IndexVersionError(IndexFormatError):
    """Raised when an index file was written by an unsupported format version."""


class IndexChecksumError(IndexFormatError):
    """Raised when an index file's body fails checksum verification."""


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Write `index` so that load_index reproduces it field-for-field.

    Vectors are stored as little-endian float32, so round trips are
    bit-exact. The header carries a SHA-256 checksum over the body.
    """
    hazards = list(index.databases)
    vector_block = b"".join(
        np.ascontiguousarray(index.databases[h].vectors, dtype="<f4").tobytes()
        for h in hazards
    )
    payload_lines = []
    for hazard in hazards:
        for chunk in index.databases[hazard].chunks:
            payload_lines.append(json.dumps(chunk_to_dict(chunk), ensure_ascii=False))
    payload = ("\n".join(payload_lines) + ("\n" if payload_lines else "")).encode("utf-8")
    body = vector_block + payload
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "embedder_id": index.embedder_id,
        "dim": index.dim,
        "created_at": index.created_at,
        "hazards": [[h, len(index.databases[h])] for h in hazards],
        "checksum": hashlib.sha256(body).hexdigest(),
    }
    with Path(path).open("wb") as fh:
        fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8") + b"\n")
        fh.write(body)


def load_index(path: str | Path) -> CorpusIndex:
    """Read an index file, verifying version and checksum."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise IndexFormatError("missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexFormatError(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != INDEX_FORMAT:
        raise IndexFormatError("not an index file")
    version = header.get("version")
    if not isinstance(version, int) or version < 1:
        raise IndexFormatError(f"invalid version field: {version!r}")
    if version > INDEX_VERSION:
        raise IndexVersionError(
            f"index written by newer format version {version} (supported: {INDEX_VERSION})"
        )

    body = raw[newline + 1 :]
    if hashlib.sha256(body).hexdigest() != header.get("checksum"):
        raise IndexChecksumError("index body failed checksum verification")

    dim = int(header["dim"])
    hazards = [(str(h), int(n)) for h, n in header["hazards"]]
    total = sum(n for _, n in hazards)
    vector_bytes = total * dim * 4
    if len(body) < vector_bytes:
        raise IndexChecksumError("index body truncated")
    vectors = np.frombuffer(body[:vector_bytes], dtype="<f4")
    payload_lines = [ln for ln in body[vector_bytes:].decode("utf-8").splitlines() if ln.strip()]
    if len(payload_lines) != total:
        raise IndexFormatError(
            f"expected {total} chunk records, found {len(payload_lines)}"
        )

    databases: dict[str, HazardDatabase] = {}
    row = 0
    line = 0
    for hazard, count in hazards:
        mat = vectors[row * dim : (row + count) * dim].reshape(count, dim).copy()
        chunks = [chunk_from_dict(json.loads(payload_lines[line + i])) for i in range(count)]
        databases[hazard] = HazardDatabase(hazard, chunks, mat)
        row += count
        line += count
    return CorpusIndex(
        databases=databases,
        embedder_id=str(header["embedder_id"]),
        dim=dim,
        created_at=str(header["created_at"]),
    )
