"""Deterministic offline benchmark: synthetic corpus, QA set, scripted agents.

Thirty synthetic reports across three hazards, each with planted facts, plus
a 40-item QA set and a scripted provider whose routing, sufficiency, and
answer rules key on question and evidence content. Everything is
reproducible byte-for-byte, needs no network, and exercises cleansing,
chunking, generation, indexing, routed retrieval, and the full loop.

Twelve true/false items are "sabotaged": six distractor chunks per item
repeat the statement verbatim but carry a different hazard tag, so they
poison a unified (unrouted) index while routed retrieval never sees them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .agents import KIND_MULTIPLE_CHOICE, KIND_TRUE_FALSE, FixtureSearchBackend
from .chunking import STRATEGY_PARAGRAPH, Chunk, chunk_paragraph, write_chunks_jsonl
from .documents import Document, document_to_dict, make_paragraphs
from .providers import MockRule, ScriptedMockProvider, save_mock_script
from .qagen import (
    QA_CATEGORIES,
    QADataset,
    Rejection,
    build_dataset,
    save_dataset,
    save_rejections,
    save_summary,
)

BENCH_HAZARDS = ("Flood", "Earthquake", "Wildfire")
DOCS_PER_HAZARD = 10
TF_ITEMS = 20
MC_ITEMS = 20
FALSE_TF_ITEMS = 6
SABOTAGED_ITEMS = 12
DISTRACTORS_PER_ITEM = 6

_KIND_WORD = {"Flood": "flood", "Earthquake": "earthquake", "Wildfire": "wildfire"}
_METRIC = {
    "Flood": ("discharge", "cubic meters per second"),
    "Earthquake": ("ground acceleration", "centimeters per second squared"),
    "Wildfire": ("flame length", "meters"),
}

_SYLLABLES_A = (
    "Bar", "Cal", "Dor", "Fen", "Gar", "Hal", "Jor", "Kel", "Lor", "Mar",
    "Nor", "Pel", "Quin", "Ros", "Tal", "Ver", "Wel", "Yar", "Bel", "Cor",
)
_SYLLABLES_B = (
    "ben", "dale", "fort", "gate", "holm", "lock", "mere", "nock", "ridge",
    "stead", "ton", "vale", "wick", "worth", "bury", "field", "ham", "ley",
)
_STRUCT_TYPES = ("Bridge", "Levee", "Viaduct", "Causeway", "Embankment", "Overpass")
_SITE_TYPES = ("Station", "Weir", "Gauge", "Outpost", "Terrace", "Basin")


def _names(offset: int, count: int) -> list[str]:
    """Distinct invented proper nouns from a fixed syllable grid."""
    grid = [a + b for a in _SYLLABLES_A for b in _SYLLABLES_B]
    return grid[offset : offset + count]


@dataclass(frozen=True)
class PlantedFacts:
    """The planted sentences and entities for one synthetic document."""

    doc_id: str
    hazard: str
    town: str
    year: int
    structure: str
    site: str
    metric: str
    unit: str
    fact_destroyed: str
    fact_measured: str
    para_destroyed: int
    para_measured: int


@dataclass(frozen=True)
class PlannedItem:
    """One QA item the benchmark expects qagen to produce."""

    ordinal: int
    kind: str
    doc_id: str
    hazard: str
    paragraph_index: int
    text: str
    options: tuple[str, ...]
    gold: str
    category: str
    fact: str
    sabotaged: bool


@dataclass
class DeskBenchmark:
    documents: list[Document]
    facts: list[PlantedFacts]
    plan: list[PlannedItem]
    dataset: QADataset
    rejections: list[Rejection]
    provider: ScriptedMockProvider
    search: FixtureSearchBackend
    clean_chunks: list[Chunk]
    distractor_chunks: list[Chunk]

    def fresh_provider(self) -> ScriptedMockProvider:
        """A provider with the same script but empty call log."""
        return ScriptedMockProvider(
            identifier=self.provider.identifier,
            sequences={a: list(s) for a, s in self.provider.sequences.items()},
            rules={a: list(r) for a, r in self.provider.rules.items()},
            defaults=dict(self.provider.defaults),
        )


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


def _build_documents() -> tuple[list[Document], list[PlantedFacts]]:
    towns = _names(0, 30)
    structures = [f"{n} {_STRUCT_TYPES[i % len(_STRUCT_TYPES)]}" for i, n in enumerate(_names(40, 30))]
    sites = [f"{n} {_SITE_TYPES[i % len(_SITE_TYPES)]}" for i, n in enumerate(_names(80, 30))]

    documents = []
    facts = []
    for h_idx, hazard in enumerate(BENCH_HAZARDS):
        kind_word = _KIND_WORD[hazard]
        metric, unit = _METRIC[hazard]
        for i in range(DOCS_PER_HAZARD):
            g = h_idx * DOCS_PER_HAZARD + i
            town = towns[g]
            year = 1985 + g
            structure = structures[g]
            site = sites[g]
            value = 40 + 7 * g
            fact_destroyed = (
                f"The {year} {town} {kind_word} destroyed the {structure} on March {i + 3}, {year}."
            )
            fact_measured = (
                f"During the {year} {town} {kind_word}, field crews measured a peak "
                f"{metric} of {value} {unit} at {site}."
            )
            paragraphs = [
                f"The {year} {town} {kind_word} affected the {town} region and nearby "
                f"communities. Reconnaissance teams documented conditions across the "
                f"area for several weeks.",
                "Table of Contents\n1. Overview\n2. Observations\n3. Damage survey",
                f"{fact_destroyed} Local crews confirmed the loss during the first damage survey.",
                f"{fact_measured} The measurement was verified against nearby instruments.",
                "References\n[1] Field survey notes, regional archive.\n"
                "[2] Instrument calibration log, station records.",
            ]
            doc_id = f"{kind_word}-{i:02d}"
            documents.append(
                Document(
                    id=doc_id,
                    title=f"{town} {kind_word} reconnaissance report",
                    hazard_type=hazard,
                    event_year=year,
                    event_location=f"{town} region",
                    body=make_paragraphs(paragraphs),
                )
            )
            facts.append(
                PlantedFacts(
                    doc_id=doc_id,
                    hazard=hazard,
                    town=town,
                    year=year,
                    structure=structure,
                    site=site,
                    metric=metric,
                    unit=unit,
                    fact_destroyed=fact_destroyed,
                    fact_measured=fact_measured,
                    para_destroyed=2,
                    para_measured=3,
                )
            )
    return documents, facts


# ---------------------------------------------------------------------------
# QA plan
# ---------------------------------------------------------------------------


def _interleaved(facts: list[PlantedFacts]) -> list[PlantedFacts]:
    """Round-robin across hazards so selections cover all three."""
    by_hazard = {h: [f for f in facts if f.hazard == h] for h in BENCH_HAZARDS}
    out = []
    for i in range(DOCS_PER_HAZARD):
        for hazard in BENCH_HAZARDS:
            out.append(by_hazard[hazard][i])
    return out


def _build_plan(facts: list[PlantedFacts]) -> list[PlannedItem]:
    order = _interleaved(facts)
    tf_sources = order[:TF_ITEMS]
    mc_sources = list(reversed(order))[:MC_ITEMS]

    plan: list[PlannedItem] = []
    for ordinal, fact in enumerate(tf_sources):
        truthful = ordinal < TF_ITEMS - FALSE_TF_ITEMS
        if truthful:
            structure = fact.structure
        else:
            # Borrow the wrong structure from an unsabotaged item so false
            # statements never overlap distractor text.
            pool = SABOTAGED_ITEMS + (ordinal + 1 - SABOTAGED_ITEMS) % (TF_ITEMS - SABOTAGED_ITEMS)
            structure = tf_sources[pool].structure
        statement = (
            f"The {structure} was destroyed during the {fact.year} {fact.town} "
            f"{_KIND_WORD[fact.hazard]}."
        )
        plan.append(
            PlannedItem(
                ordinal=ordinal,
                kind=KIND_TRUE_FALSE,
                doc_id=fact.doc_id,
                hazard=fact.hazard,
                paragraph_index=fact.para_destroyed,
                text=statement,
                options=(),
                gold="true" if truthful else "false",
                category=QA_CATEGORIES[ordinal % len(QA_CATEGORIES)],
                fact=fact.fact_destroyed,
                sabotaged=truthful and ordinal < SABOTAGED_ITEMS,
            )
        )
    for j, fact in enumerate(mc_sources):
        ordinal = TF_ITEMS + j
        question = (
            f"During the {fact.year} {fact.town} {_KIND_WORD[fact.hazard]}, "
            f"which site recorded the peak {fact.metric}?"
        )
        wrong = [mc_sources[(j + k) % MC_ITEMS].site for k in (1, 2, 3)]
        correct_pos = j % 4
        sites = wrong[:correct_pos] + [fact.site] + wrong[correct_pos:]
        options = tuple(f"{letter}. {site}" for letter, site in zip("ABCD", sites))
        plan.append(
            PlannedItem(
                ordinal=ordinal,
                kind=KIND_MULTIPLE_CHOICE,
                doc_id=fact.doc_id,
                hazard=fact.hazard,
                paragraph_index=fact.para_measured,
                text=question,
                options=options,
                gold="ABCD"[correct_pos],
                category=QA_CATEGORIES[ordinal % len(QA_CATEGORIES)],
                fact=fact.fact_measured,
                sabotaged=False,
            )
        )
    return plan


# ---------------------------------------------------------------------------
# Scripted agents
# ---------------------------------------------------------------------------


def _routing_json(hazard: str) -> str:
    from .hazards import HAZARD_CATEGORIES

    return json.dumps({h: (1.0 if h == hazard else 0.0) for h in HAZARD_CATEGORIES})


def _qa_json(item: PlannedItem) -> str:
    if item.kind == KIND_TRUE_FALSE:
        payload = {"statement": item.text, "answer": item.gold, "category": item.category}
    else:
        payload = {
            "question": item.text,
            "options": list(item.options),
            "correct": item.gold,
            "category": item.category,
        }
    return json.dumps(payload, ensure_ascii=False)


def _build_provider(plan: list[PlannedItem], facts: list[PlantedFacts]) -> ScriptedMockProvider:
    router_rules = [
        MockRule(contains=(fact.town,), response=_routing_json(fact.hazard)) for fact in facts
    ]
    evaluator_rules = [MockRule(contains=(item.fact,), response="1") for item in plan]
    answer_rules = [
        MockRule(
            contains=(item.text, item.fact),
            response=item.gold,
        )
        for item in plan
    ]
    qa_rules = [MockRule(contains=(item.fact,), response=_qa_json(item)) for item in plan]
    return ScriptedMockProvider(
        identifier="deskbench-mock",
        rules={
            "router": router_rules,
            "evaluator": evaluator_rules,
            "answer_writer": answer_rules,
            "qa_generator": qa_rules,
        },
        defaults={
            "router": _routing_json(BENCH_HAZARDS[0]),
            "evaluator": "0",
            "answer_writer": "X",
            "qa_generator": "{ }",
            "rewriter": "Provide additional reconnaissance detail for the event.",
        },
    )


def _build_distractors(plan: list[PlannedItem]) -> list[Chunk]:
    chunks = []
    for item in plan:
        if not item.sabotaged:
            continue
        wrong_hazard = BENCH_HAZARDS[(BENCH_HAZARDS.index(item.hazard) + 1) % len(BENCH_HAZARDS)]
        for j in range(DISTRACTORS_PER_ITEM):
            chunks.append(
                Chunk(
                    id=f"000-noise:{item.ordinal:02d}:{j}",
                    text=(
                        f"Commentary note {j}: {item.text} Review of this claim is "
                        f"pending across agencies."
                    ),
                    hazard_type=wrong_hazard,
                    source={"doc_id": f"000-noise-{item.ordinal:02d}"},
                    strategy=STRATEGY_PARAGRAPH,
                )
            )
    return chunks


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def build_benchmark() -> DeskBenchmark:
    """Construct the full benchmark; deterministic, no I/O."""
    documents, facts = _build_documents()
    plan = _build_plan(facts)
    provider = _build_provider(plan, facts)
    dataset, rejections = build_dataset(documents, provider)
    if len(dataset.items) != TF_ITEMS + MC_ITEMS:
        raise AssertionError(f"benchmark produced {len(dataset.items)} items, expected 40")
    golds = {
        (it.provenance.doc_id, it.provenance.paragraph_index, it.kind): it.gold
        for it in dataset.items
    }
    for item in plan:
        key = (item.doc_id, item.paragraph_index, item.kind)
        if golds.get(key) != item.gold:
            raise AssertionError(f"benchmark item mismatch for {key}")
    clean_chunks = [chunk for doc in documents for chunk in chunk_paragraph(doc)]
    provider.reset()
    return DeskBenchmark(
        documents=documents,
        facts=facts,
        plan=plan,
        dataset=dataset,
        rejections=rejections,
        provider=provider,
        search=FixtureSearchBackend(results={}, identifier="deskbench-search"),
        clean_chunks=clean_chunks,
        distractor_chunks=_build_distractors(plan),
    )


def write_benchmark_files(out_dir: str | Path) -> dict:
    """Materialize the benchmark for CLI use; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bench = build_benchmark()
    paths = {
        "documents": out / "documents.json",
        "mock_script": out / "mock_script.json",
        "search_fixture": out / "search_fixture.json",
        "dataset": out / "dataset.jsonl",
        "summary": out / "dataset.summary.json",
        "rejections": out / "dataset.rejections.jsonl",
        "distractors": out / "distractors.jsonl",
    }
    paths["documents"].write_text(
        json.dumps([document_to_dict(d) for d in bench.documents], ensure_ascii=False, indent=2)
        + "\n",
        encoding="utf-8",
    )
    save_mock_script(bench.provider, paths["mock_script"])
    paths["search_fixture"].write_text(
        json.dumps(bench.search.to_fixture(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    save_dataset(bench.dataset, paths["dataset"])
    save_summary(bench.dataset, paths["summary"])
    save_rejections(bench.rejections, paths["rejections"])
    write_chunks_jsonl(bench.distractor_chunks, paths["distractors"])
    return {name: str(path) for name, path in paths.items()}


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Write the offline demo benchmark files.")
    parser.add_argument("--out", default="deskbench", help="output directory")
    args = parser.parse_args()
    written = write_benchmark_files(args.out)
    for name, path in written.items():
        print(f"{name}: {path}")
