"""QA dataset construction: generation, schema validation, bookkeeping."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .agents import KIND_MULTIPLE_CHOICE, KIND_TRUE_FALSE
from .documents import Document, DocumentMeta, Paragraph, cleanse
from .prompts import get_template, render_prompt
from .providers import (
    MAX_PARSE_RETRIES,
    AgentProvider,
    CallRecorder,
    StructuredOutputError,
)

logger = logging.getLogger(__name__)

DATASET_VERSION = 1

QA_CATEGORIES = (
    "Hazard Characteristics",
    "Analysis Approach",
    "Impacts and Damage",
    "Response and Recovery",
)

QA_KINDS = (KIND_TRUE_FALSE, KIND_MULTIPLE_CHOICE)

_OPTION_PREFIXES = ("A.", "B.", "C.", "D.")
_EMPTY_OBJECT_RE = re.compile(r"^\{\s*\}$")


class DatasetFormatError(ValueError):
    """Raised when a persisted dataset fails schema validation."""


@dataclass(frozen=True)
class Provenance:
    doc_id: str
    paragraph_index: int
    hazard_type: str
    event_year: int
    event_location: str

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "paragraph_index": self.paragraph_index,
            "hazard_type": self.hazard_type,
            "event_year": self.event_year,
            "event_location": self.event_location,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Provenance":
        return cls(
            doc_id=str(data["doc_id"]),
            paragraph_index=int(data["paragraph_index"]),
            hazard_type=str(data["hazard_type"]),
            event_year=int(data["event_year"]),
            event_location=str(data["event_location"]),
        )


@dataclass(frozen=True)
class QAItem:
    """One validated True/False or Multiple-Choice item."""

    id: str
    kind: str
    statement_or_question: str
    options: tuple[str, ...]
    gold: str
    category: str
    provenance: Provenance

    def prompt_text(self) -> str:
        """The text handed to the answer writer (options inlined for MC)."""
        if self.kind == KIND_MULTIPLE_CHOICE:
            return self.statement_or_question + "\n" + "\n".join(self.options)
        return self.statement_or_question

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "statement_or_question": self.statement_or_question,
            "options": list(self.options),
            "gold": self.gold,
            "category": self.category,
            "provenance": self.provenance.to_dict(),
        }

    def to_generator_json(self) -> dict:
        """Re-encode in the generator's raw output shape (for re-validation)."""
        if self.kind == KIND_TRUE_FALSE:
            return {
                "statement": self.statement_or_question,
                "answer": self.gold,
                "category": self.category,
            }
        return {
            "question": self.statement_or_question,
            "options": list(self.options),
            "correct": self.gold,
            "category": self.category,
        }


@dataclass(frozen=True)
class Rejection:
    """A discarded generation, kept for the audit ledger."""

    reason: str
    detail: str
    provenance: Provenance
    raw: dict | str | None = None

    def to_dict(self) -> dict:
        return {
            "reason": self.reason,
            "detail": self.detail,
            "provenance": self.provenance.to_dict(),
            "raw": self.raw,
        }


@dataclass
class QADataset:
    items: list[QAItem] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def counts(self) -> dict:
        """Summary counts: totals, by kind, by category, by hazard, crossed."""
        by_kind = {k: 0 for k in QA_KINDS}
        by_category = {c: 0 for c in QA_CATEGORIES}
        by_hazard: dict[str, int] = {}
        crossed = {k: {c: 0 for c in QA_CATEGORIES} for k in QA_KINDS}
        for item in self.items:
            by_kind[item.kind] += 1
            by_category[item.category] += 1
            by_hazard[item.provenance.hazard_type] = (
                by_hazard.get(item.provenance.hazard_type, 0) + 1
            )
            crossed[item.kind][item.category] += 1
        return {
            "version": DATASET_VERSION,
            "total": len(self.items),
            "by_kind": by_kind,
            "by_category": by_category,
            "by_hazard": by_hazard,
            "by_kind_category": crossed,
        }


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def generate_qa(
    provider: AgentProvider,
    paragraph: Paragraph,
    meta: DocumentMeta,
    log: CallRecorder | None = None,
) -> dict | None:
    """Ask the provider for one raw QA object for a content paragraph.

    Returns None when the provider marks the paragraph unsuitable by
    answering an empty object. Malformed output raises
    StructuredOutputError after retries; dataset building treats that as a
    skip, not a failure.
    """
    prompt = render_prompt(
        get_template("qa_generator"),
        {
            "disaster_type": meta.hazard_type,
            "year": meta.event_year,
            "location": meta.event_location,
            "paragraph": paragraph.text,
        },
    )
    for _ in range(1 + MAX_PARSE_RETRIES):
        raw = provider.complete("qa_generator", prompt)
        call = log.record("qa_generator", prompt, raw) if log is not None else None
        stripped = raw.strip()
        if _EMPTY_OBJECT_RE.match(stripped):
            if call is not None:
                call.parsed = "unsuitable"
            return None
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError:
            continue
        if not isinstance(data, dict):
            continue
        if call is not None:
            call.parsed = "qa object"
        return data
    raise StructuredOutputError(
        f"qa generation failed for paragraph {paragraph.index} of {meta.doc_id}"
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def item_id(provenance: Provenance, kind: str) -> str:
    digest = hashlib.sha256(
        f"{provenance.doc_id}|{provenance.paragraph_index}|{kind}".encode("utf-8")
    )
    return digest.hexdigest()[:12]


def _reject(reason: str, detail: str, provenance: Provenance, raw) -> Rejection:
    return Rejection(reason=reason, detail=detail, provenance=provenance, raw=raw)


def _match_category(raw_value) -> str | None:
    if not isinstance(raw_value, str):
        return None
    wanted = raw_value.strip().casefold()
    for category in QA_CATEGORIES:
        if category.casefold() == wanted:
            return category
    return None


def validate_qa(raw: dict, provenance: Provenance) -> QAItem | Rejection:
    """Check a raw generator object against the item schema.

    Rejection is a value, not an error; reasons are one of bad_kind,
    bad_options, bad_gold, bad_category, empty_text.
    """
    if not isinstance(raw, dict):
        return _reject("bad_kind", "output is not an object", provenance, str(raw))
    is_tf = "statement" in raw or "answer" in raw
    is_mc = "question" in raw or "options" in raw or "correct" in raw
    if is_tf == is_mc:
        return _reject("bad_kind", "cannot tell True/False from Multiple-Choice", provenance, raw)

    category = _match_category(raw.get("category"))
    if category is None:
        return _reject(
            "bad_category",
            f"category {raw.get('category')!r} not among the four valid categories",
            provenance,
            raw,
        )

    if is_tf:
        statement = raw.get("statement")
        if not isinstance(statement, str) or not statement.strip():
            return _reject("empty_text", "missing or empty statement", provenance, raw)
        answer = raw.get("answer")
        if isinstance(answer, bool):
            gold = "true" if answer else "false"
        elif isinstance(answer, str) and answer.strip().casefold() in ("true", "false"):
            gold = answer.strip().casefold()
        else:
            return _reject("bad_gold", f"answer {answer!r} is not true/false", provenance, raw)
        return QAItem(
            id=item_id(provenance, KIND_TRUE_FALSE),
            kind=KIND_TRUE_FALSE,
            statement_or_question=statement.strip(),
            options=(),
            gold=gold,
            category=category,
            provenance=provenance,
        )

    question = raw.get("question")
    if not isinstance(question, str) or not question.strip():
        return _reject("empty_text", "missing or empty question", provenance, raw)
    options = raw.get("options")
    if not isinstance(options, list) or len(options) != 4:
        return _reject("bad_options", "options must be a list of exactly 4", provenance, raw)
    for i, option in enumerate(options):
        if not isinstance(option, str) or not option.startswith(_OPTION_PREFIXES[i]):
            return _reject(
                "bad_options",
                f"option {i} must be a string prefixed {_OPTION_PREFIXES[i]!r}",
                provenance,
                raw,
            )
        if not option[len(_OPTION_PREFIXES[i]) :].strip():
            return _reject("bad_options", f"option {i} has no text", provenance, raw)
    correct = raw.get("correct")
    gold = correct.strip().upper() if isinstance(correct, str) else ""
    if gold not in ("A", "B", "C", "D"):
        return _reject("bad_gold", f"correct {correct!r} is not one of A-D", provenance, raw)
    return QAItem(
        id=item_id(provenance, KIND_MULTIPLE_CHOICE),
        kind=KIND_MULTIPLE_CHOICE,
        statement_or_question=question.strip(),
        options=tuple(options),
        gold=gold,
        category=category,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# Dataset assembly
# ---------------------------------------------------------------------------


def build_dataset(
    documents: list[Document],
    provider: AgentProvider,
    log: CallRecorder | None = None,
) -> tuple[QADataset, list[Rejection]]:
    """Cleanse, generate, and validate per paragraph; never fails per-item.

    Returns the dataset plus the rejection ledger (unsuitable paragraphs,
    malformed generations, schema rejections). Duplicate provenance ids are
    disambiguated with a deterministic numeric suffix.
    """
    items: list[QAItem] = []
    rejections: list[Rejection] = []
    seen_ids: dict[str, int] = {}
    for document in documents:
        meta = DocumentMeta.of(document)
        for paragraph in cleanse(document):
            provenance = Provenance(
                doc_id=document.id,
                paragraph_index=paragraph.index,
                hazard_type=document.hazard_type,
                event_year=document.event_year,
                event_location=document.event_location,
            )
            try:
                raw = generate_qa(provider, paragraph, meta, log)
            except StructuredOutputError as exc:
                logger.warning("skipping paragraph: %s", exc)
                rejections.append(_reject("malformed_output", str(exc), provenance, None))
                continue
            if raw is None:
                rejections.append(
                    _reject("unsuitable", "generator marked paragraph unsuitable", provenance, None)
                )
                continue
            result = validate_qa(raw, provenance)
            if isinstance(result, Rejection):
                rejections.append(result)
                continue
            count = seen_ids.get(result.id, 0)
            seen_ids[result.id] = count + 1
            if count:
                result = QAItem(
                    id=f"{result.id}-{count + 1}",
                    kind=result.kind,
                    statement_or_question=result.statement_or_question,
                    options=result.options,
                    gold=result.gold,
                    category=result.category,
                    provenance=result.provenance,
                )
            items.append(result)
    return QADataset(items=items), rejections


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_dataset(dataset: QADataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for item in dataset.items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")


def _item_from_dict(data: dict) -> QAItem:
    required = ("id", "kind", "statement_or_question", "options", "gold", "category", "provenance")
    missing = [k for k in required if k not in data]
    if missing:
        raise DatasetFormatError(f"item missing fields: {', '.join(missing)}")
    if data["kind"] not in QA_KINDS:
        raise DatasetFormatError(f"unknown kind: {data['kind']!r}")
    if data["category"] not in QA_CATEGORIES:
        raise DatasetFormatError(f"unknown category: {data['category']!r}")
    item = QAItem(
        id=str(data["id"]),
        kind=str(data["kind"]),
        statement_or_question=str(data["statement_or_question"]),
        options=tuple(str(o) for o in data["options"]),
        gold=str(data["gold"]),
        category=str(data["category"]),
        provenance=Provenance.from_dict(data["provenance"]),
    )
    if item.kind == KIND_TRUE_FALSE:
        if item.options or item.gold not in ("true", "false"):
            raise DatasetFormatError(f"item {item.id}: invalid True/False shape")
    else:
        if len(item.options) != 4 or item.gold not in ("A", "B", "C", "D"):
            raise DatasetFormatError(f"item {item.id}: invalid Multiple-Choice shape")
        for i, option in enumerate(item.options):
            if not option.startswith(_OPTION_PREFIXES[i]):
                raise DatasetFormatError(f"item {item.id}: option {i} badly prefixed")
    if not item.statement_or_question.strip():
        raise DatasetFormatError(f"item {item.id}: empty text")
    return item


def load_dataset(path: str | Path) -> QADataset:
    """Read a dataset file, re-validating every line."""
    items: list[QAItem] = []
    ids: set[str] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: invalid JSON") from exc
            try:
                item = _item_from_dict(data)
            except DatasetFormatError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from exc
            if item.id in ids:
                raise DatasetFormatError(f"line {lineno}: duplicate item id {item.id!r}")
            ids.add(item.id)
            items.append(item)
    return QADataset(items=items)


def save_rejections(rejections: list[Rejection], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rejection in rejections:
            fh.write(json.dumps(rejection.to_dict(), ensure_ascii=False) + "\n")


def save_summary(dataset: QADataset, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(dataset.counts(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
