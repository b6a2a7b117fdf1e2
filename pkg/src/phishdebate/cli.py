"""Command-line entry point: ``phishdebate {ingest,run,score,validate} --config PATH``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from typing import Optional, Sequence

from .config import ConfigError, ExperimentConfig
from .corpus import CorpusError, filter_corpus, format_summary_table, load_corpus, summarize
from .metrics import format_table, reports_to_json
from .runner import RunError, prepare_emails, render_dry_run, run_experiment, score_file, write_reports

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _ingest(config: ExperimentConfig, args) -> int:
    raw, kept = [], []
    for spec in config.datasets:
        records = load_corpus(
            spec.path, spec.format, spec.field_map, spec.label_aliases, dataset=spec.name, delimiter=spec.delimiter
        )
        raw.extend(records)
        if records:
            kept.extend(filter_corpus(records, config.length_unit, config.percentile))
    before, after = summarize(raw, config.length_unit), summarize(kept, config.length_unit)
    print(f"Raw corpora (length unit: {config.length_unit.value})")
    print(format_summary_table(before))
    print(f"\nAfter {config.percentile}th-percentile length filter")
    print(format_summary_table(after))
    n_ham = sum(s.num_ham for s in after)
    n_phish = sum(s.num_phishing for s in after)
    print(f"\nTotal kept: {n_ham + n_phish} ({n_ham} ham, {n_phish} phishing)")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "length_unit": config.length_unit.value,
        "percentile": config.percentile,
        "raw": [asdict(s) for s in before],
        "filtered": [asdict(s) for s in after],
    }
    (config.output_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _run(config: ExperimentConfig, args) -> int:
    if args.dry_run:
        print(render_dry_run(config, prepare_emails(config, args.limit if args.limit is not None else 1)))
        return EXIT_OK
    result = run_experiment(config, limit=args.limit, resume=args.resume)
    print(format_table(result.reports))
    if result.failures:
        print(f"\n{result.failures} debate(s) recorded with errors", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _score(config: ExperimentConfig, args) -> int:
    reports = score_file(config.transcripts_path, exclude_ambiguous=config.exclude_ambiguous)
    write_reports(reports, config.output_dir)
    print(reports_to_json(reports) if args.json else format_table(reports))
    return EXIT_OK


def _validate(config: ExperimentConfig, args) -> int:
    missing = [str(d.path) for d in config.datasets if not d.path.is_file()]
    if missing:
        print("missing dataset files:\n  " + "\n  ".join(missing), file=sys.stderr)
        return EXIT_CONFIG
    print(f"config OK: {len(config.datasets)} datasets, {len(config.matrix)} matrix entries, hash {config.config_hash()[:12]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phishdebate", description="Debate-driven phishing email classification")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        return p

    add("ingest", help="summarize datasets before and after length filtering")
    run = add("run", help="run the debate experiment matrix")
    run.add_argument("--dry-run", action="store_true", help="print rendered prompts; make no provider calls")
    run.add_argument("--limit", type=int, default=None, help="first N emails per dataset")
    run.add_argument("--resume", action="store_true", help="continue an interrupted run in output_dir")
    score = add("score", help="recompute reports from stored transcripts")
    score.add_argument("--json", action="store_true", help="print JSON instead of a table")
    add("validate", help="check a config file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"ingest": _ingest, "run": _run, "score": _score, "validate": _validate}
    try:
        config = ExperimentConfig.load(args.config)
        return handlers[args.command](config, args)
    except (ConfigError, CorpusError, RunError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
