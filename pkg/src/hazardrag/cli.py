"""Command-line entry point: ingest, index, ask, genqa, eval.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .agentic import chunk_document
from .agents import KIND_MULTIPLE_CHOICE, KIND_TRUE_FALSE
from .chunking import CHUNK_STRATEGIES, read_chunks_jsonl, write_chunks_jsonl
from .config import ConfigError, Settings, build_agent_provider, build_embedder, build_scorer, build_search_backend, resolve_settings
from .documents import DocumentFormatError, load_documents
from .evalharness import EVAL_VARIANTS, VARIANT_FULL_MORA, EvalConfig, ablate, evaluate
from .index_io import load_index, save_index
from .pipeline import Backends, PipelineConfig, infer, save_trace
from .qagen import build_dataset, load_dataset, save_dataset, save_rejections, save_summary
from .report import (
    render_ablation_table,
    render_category_table,
    render_figures,
    render_hazard_table,
    write_items_csv,
    write_report_json,
)
from .vecstore import build_index

logger = logging.getLogger(__name__)

_KIND_FLAGS = {"tf": KIND_TRUE_FALSE, "mc": KIND_MULTIPLE_CHOICE}


class CliError(RuntimeError):
    """A runtime failure that should exit with code 1."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazardrag",
        description="Routed retrieval-augmented QA over multi-hazard report corpora.",
    )
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", type=int, help="seed for mock backends")
    parser.add_argument("--parallelism", type=int, help="batch inference workers")
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="chunk documents into a JSONL chunk file")
    p_ingest.add_argument("inputs", nargs="+", help="document files or directories")
    p_ingest.add_argument("--strategy", choices=CHUNK_STRATEGIES, default="paragraph")
    p_ingest.add_argument("--out", required=True, help="chunk file to write")
    p_ingest.add_argument("--provider", help="agent provider (proposition/agentic strategies)")
    p_ingest.add_argument("--window", type=int, default=200, help="fixed-token window size")
    p_ingest.add_argument("--overlap", type=int, default=50, help="fixed-token context overlap")
    p_ingest.add_argument("--hazard", help="hazard type for plain-text inputs")
    p_ingest.add_argument("--year", type=int, help="event year for plain-text inputs")
    p_ingest.add_argument("--location", help="event location for plain-text inputs")

    p_index = sub.add_parser("index", help="embed a chunk file into a vector index")
    p_index.add_argument("chunks", help="chunk JSONL file")
    p_index.add_argument("--out", help="index file to write (default: configured index)")
    p_index.add_argument("--embedder", help="embedding backend: mock or http")
    p_index.add_argument("--embed-dim", type=int, dest="embed_dim", help="embedding dimension")

    p_ask = sub.add_parser("ask", help="answer one question against an index")
    p_ask.add_argument("question", help="question or statement text")
    p_ask.add_argument("--index", help="index file to search")
    p_ask.add_argument("--kind", choices=sorted(_KIND_FLAGS), default="tf")
    p_ask.add_argument("--variant", choices=EVAL_VARIANTS, default=VARIANT_FULL_MORA)
    p_ask.add_argument("--provider", help="agent provider: mock:<script.json> or http")
    p_ask.add_argument("--embedder", help="embedding backend: mock or http")
    p_ask.add_argument("--embed-dim", type=int, dest="embed_dim")
    p_ask.add_argument("--search", help="search backend: none, fixture:<file>, or URL")
    p_ask.add_argument("--scorer", help="rerank scorer: lexical or provider")
    p_ask.add_argument("--tau", type=float, help="routing threshold")
    p_ask.add_argument("--coarse-budget", type=int, dest="coarse_budget")
    p_ask.add_argument("--rerank-k", type=int, dest="rerank_k")
    p_ask.add_argument("--max-iterations", type=int, dest="max_iterations")
    p_ask.add_argument("--trace", help="write the inference trace JSON here")

    p_genqa = sub.add_parser("genqa", help="build a QA dataset from documents")
    p_genqa.add_argument("inputs", nargs="+", help="document files or directories")
    p_genqa.add_argument("--out", required=True, help="dataset JSONL to write")
    p_genqa.add_argument("--provider", help="agent provider: mock:<script.json> or http")
    p_genqa.add_argument("--force", action="store_true", help="overwrite an existing dataset")
    p_genqa.add_argument("--hazard", help="hazard type for plain-text inputs")
    p_genqa.add_argument("--year", type=int, help="event year for plain-text inputs")
    p_genqa.add_argument("--location", help="event location for plain-text inputs")

    p_eval = sub.add_parser("eval", help="evaluate a dataset under one or more configs")
    p_eval.add_argument("--dataset", required=True, help="dataset JSONL file")
    p_eval.add_argument(
        "--index",
        action="append",
        required=True,
        help="index file; repeat to give one per variant",
    )
    p_eval.add_argument(
        "--variant",
        action="append",
        choices=EVAL_VARIANTS,
        help=f"pipeline variant (repeatable; default {VARIANT_FULL_MORA})",
    )
    p_eval.add_argument("--out-dir", required=True, help="report output directory")
    p_eval.add_argument("--provider", help="agent provider: mock:<script.json> or http")
    p_eval.add_argument("--embedder", help="embedding backend: mock or http")
    p_eval.add_argument("--embed-dim", type=int, dest="embed_dim")
    p_eval.add_argument("--search", help="search backend: none, fixture:<file>, or URL")
    p_eval.add_argument("--scorer", help="rerank scorer: lexical or provider")
    p_eval.add_argument("--tau", type=float)
    p_eval.add_argument("--coarse-budget", type=int, dest="coarse_budget")
    p_eval.add_argument("--rerank-k", type=int, dest="rerank_k")
    p_eval.add_argument("--max-iterations", type=int, dest="max_iterations")
    p_eval.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _settings(args: argparse.Namespace) -> Settings:
    flags = {k: v for k, v in vars(args).items() if v is not None}
    return resolve_settings(flags, config_path=args.config)


def _pipeline_config(settings: Settings) -> PipelineConfig:
    return PipelineConfig(
        max_iterations=settings.max_iterations,
        tau=settings.tau,
        coarse_budget=settings.coarse_budget,
        rerank_k=settings.rerank_k,
        search_n=settings.search_n,
    )


def _load_index_or_fail(path: str) -> object:
    if not Path(path).exists():
        raise CliError(f"index not found: {path}")
    return load_index(path)


def _backends(settings: Settings) -> Backends:
    provider = build_agent_provider(settings.provider)
    embedder = build_embedder(settings.embedder, settings.embed_dim, settings.seed)
    search = build_search_backend(settings.search)
    return Backends(provider=provider, embedder=embedder, search=search)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, settings: Settings) -> int:
    provider = None
    if args.strategy in ("proposition", "agentic"):
        spec = args.provider or settings.provider
        provider = build_agent_provider(spec)
    try:
        documents = load_documents(
            args.inputs,
            hazard_type=args.hazard,
            event_year=args.year,
            event_location=args.location,
        )
    except (OSError, DocumentFormatError) as exc:
        raise CliError(f"cannot read documents: {exc}") from exc
    all_chunks = []
    for doc in documents:
        chunks = chunk_document(
            doc, args.strategy, provider=provider, window=args.window, overlap=args.overlap
        )
        all_chunks.extend(chunks)
        print(f"{doc.id}: {len(chunks)} chunks")
    write_chunks_jsonl(all_chunks, args.out)
    print(f"wrote {len(all_chunks)} chunks ({args.strategy}) to {args.out}")
    return 0


def cmd_index(args: argparse.Namespace, settings: Settings) -> int:
    chunks = read_chunks_jsonl(args.chunks)
    embedder = build_embedder(settings.embedder, settings.embed_dim, settings.seed)
    index = build_index(chunks, embedder)
    out = args.out or settings.index
    save_index(index, out)
    sizes = ", ".join(f"{h}: {len(db)}" for h, db in index.databases.items()) or "empty"
    print(f"indexed {index.total_chunks} chunks ({sizes}) -> {out}")
    return 0


def cmd_ask(args: argparse.Namespace, settings: Settings) -> int:
    from .evalharness import pipeline_config_for

    index = _load_index_or_fail(args.index or settings.index)
    backends = _backends(settings)
    scorer = build_scorer(settings.scorer, backends.provider)
    cfg = pipeline_config_for(
        EvalConfig(name=args.variant, variant=args.variant), _pipeline_config(settings)
    )
    answer, trace = infer(
        args.question, index, cfg, backends, scorer, kind=_KIND_FLAGS[args.kind]
    )
    print(f"answer: {answer.value if answer.value is not None else 'abstain'}")
    print(f"evidence source: {trace.evidence_source}")
    sources = trace.iterations[-1].evidence.ids if trace.iterations else []
    for source in sources:
        print(f"  [{source}]")
    if args.trace:
        save_trace(trace, args.trace)
        print(f"trace written to {args.trace}")
    return 0


def cmd_genqa(args: argparse.Namespace, settings: Settings) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        raise CliError(f"refusing to overwrite {out} (use --force)")
    provider = build_agent_provider(args.provider or settings.provider)
    try:
        documents = load_documents(
            args.inputs,
            hazard_type=args.hazard,
            event_year=args.year,
            event_location=args.location,
        )
    except (OSError, DocumentFormatError) as exc:
        raise CliError(f"cannot read documents: {exc}") from exc
    dataset, rejections = build_dataset(documents, provider)
    save_dataset(dataset, out)
    save_rejections(rejections, out.with_suffix(".rejections.jsonl"))
    save_summary(dataset, out.with_suffix(".summary.json"))
    print(f"dataset: {len(dataset.items)} items -> {out}")
    print(f"rejections: {len(rejections)} -> {out.with_suffix('.rejections.jsonl')}")
    return 0


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    variants = args.variant or [VARIANT_FULL_MORA]
    index_paths = args.index
    if len(index_paths) not in (1, len(variants)):
        raise CliError(
            f"--index given {len(index_paths)} times for {len(variants)} variants; "
            "give one shared index or one per variant"
        )
    dataset = load_dataset(args.dataset)
    indexes = [_load_index_or_fail(p) for p in index_paths]
    if len(indexes) == 1:
        indexes = indexes * len(variants)
    backends = _backends(settings)
    scorer = build_scorer(settings.scorer, backends.provider)
    base_cfg = _pipeline_config(settings)
    configs = [EvalConfig(name=v, variant=v) for v in variants]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if len(configs) == 1:
        reports = [
            evaluate(
                dataset, configs[0], indexes[0], backends, scorer,
                parallelism=settings.parallelism, base_config=base_cfg,
            )
        ]
        tables = [render_category_table(reports), render_hazard_table(reports)]
    else:
        ablation = ablate(
            dataset, configs, indexes, backends, scorer,
            parallelism=settings.parallelism, base_config=base_cfg,
        )
        reports = ablation.reports
        tables = [
            render_category_table(reports),
            render_hazard_table(reports),
            render_ablation_table(ablation),
        ]

    for report in reports:
        write_report_json(report, out_dir / f"{report.config.name}.report.json")
        write_items_csv(report, out_dir / f"{report.config.name}.items.csv")
    text = "\n\n".join(tables) + "\n"
    (out_dir / "tables.txt").write_text(text, encoding="utf-8")
    print(text)
    if not args.no_figures:
        for path in render_figures(reports, out_dir):
            print(f"figure: {path}")
    print(f"reports written to {out_dir}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "index": cmd_index,
    "ask": cmd_ask,
    "genqa": cmd_genqa,
    "eval": cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        settings = _settings(args)
        return _COMMANDS[args.command](args, settings)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # unexpected runtime failure
        logger.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
