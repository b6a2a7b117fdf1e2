"""Batch orchestration: corpus preparation, concurrent debates, JSONL transcripts, resume, reports."""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from .config import ExperimentConfig, MatrixEntry
from .corpus import EmailRecord, filter_corpus, load_corpus
from .debate import SCHEMA_VERSION, DebateFailure, run_debate
from .metrics import ConfusionCounts, EvalReport, confusion_counts, format_table, reports_to_json, score_report
from .prompts import Stance, build_debater_prompt, build_judge_prompt
from .providers import HTTPProvider, Provider, ProviderConfig, ScriptedProvider

log = logging.getLogger(__name__)


class RunError(RuntimeError):
    pass


@dataclass
class RunCheckpoint:
    """Completed (matrix label, email id) pairs recovered from a transcript file."""

    config_hash: Optional[str] = None
    completed: dict[str, set[str]] = field(default_factory=dict)

    def is_done(self, label: str, email_id: str) -> bool:
        return email_id in self.completed.get(label, ())

    def __len__(self) -> int:
        return sum(len(ids) for ids in self.completed.values())

    @classmethod
    def scan(cls, path: Path) -> "RunCheckpoint":
        checkpoint = cls()
        for record in read_transcripts(path):
            h = record.get("config_hash")
            if checkpoint.config_hash is None:
                checkpoint.config_hash = h
            elif h != checkpoint.config_hash:
                raise RunError(f"{path} mixes transcripts from different configs")
            checkpoint.completed.setdefault(record["config_label"], set()).add(record["email_id"])
        return checkpoint


@dataclass
class RunResult:
    reports: list[EvalReport]
    records: list[dict[str, Any]]
    new_records: int
    failures: int


def read_transcripts(path: Path) -> list[dict[str, Any]]:
    """Parse a transcript file, ignoring a trailing line cut short by a crash."""
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    # Everything before the last newline is complete; the remainder is a torn write.
    for lineno, line in enumerate(lines[:-1], start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise RunError(f"{path}:{lineno}: corrupt transcript line: {exc.msg}") from None
    return records


def _repair_tail(path: Path) -> None:
    if not path.exists():
        return
    data = path.read_bytes()
    if data and not data.endswith(b"\n"):
        cut = data.rfind(b"\n") + 1
        log.warning("%s: dropping %d bytes of a torn final line", path, len(data) - cut)
        with path.open("r+b") as fh:
            fh.truncate(cut)


def prepare_emails(config: ExperimentConfig, limit: Optional[int] = None) -> list[EmailRecord]:
    """Load, percentile-filter (per dataset), optionally shuffle, and truncate each dataset."""
    rng = random.Random(config.seed)
    emails: list[EmailRecord] = []
    for spec in config.datasets:
        records = load_corpus(
            spec.path, spec.format, spec.field_map, spec.label_aliases, dataset=spec.name, delimiter=spec.delimiter
        )
        if not records:
            log.warning("dataset %s is empty", spec.name)
            continue
        records = filter_corpus(records, config.length_unit, config.percentile)
        if config.shuffle:
            rng.shuffle(records)
        if limit is not None:
            records = records[:limit]
        emails.extend(records)
    return emails


def build_providers(
    config: ExperimentConfig,
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
) -> dict[str, Provider]:
    providers: dict[str, Provider] = {}
    for offset, (name, spec) in enumerate(sorted(config.providers.items())):
        if spec.get("kind", "http") == "scripted":
            providers[name] = ScriptedProvider(spec.get("script"), spec.get("default_reply"), name=name)
        else:
            providers[name] = HTTPProvider(
                ProviderConfig.from_dict(name, spec),
                clock=clock,
                sleep=sleep,
                rng=random.Random(config.seed + offset),
            )
    return providers


def _failure_record(entry: MatrixEntry, email: EmailRecord, failure: DebateFailure, stamp: dict) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "config_label": entry.label,
        "dataset": email.dataset,
        "email_id": email.id,
        "label": email.label.value,
        "options": {"cot": entry.options.cot, "role": entry.options.role},
        "arguments": [],
        "judge_text": "",
        "verdict": None,
        "error": f"{failure.stage}: {failure.cause}",
        "attempts_per_call": [],
        "clock": stamp,
    }


class _BoundedRunner:
    """Thread pool that never holds more than ``parallelism`` debates in flight."""

    def __init__(self, parallelism: int):
        self.parallelism = parallelism
        self._pool = ThreadPoolExecutor(max_workers=parallelism, thread_name_prefix="debate")

    def map_ordered(self, fn, items: Iterable):
        # Results come back in submission order so the transcript file is deterministic.
        pending: deque[Future] = deque()
        try:
            for item in items:
                if len(pending) >= self.parallelism:
                    yield pending.popleft().result()
                pending.append(self._pool.submit(fn, item))
            while pending:
                yield pending.popleft().result()
        finally:
            for f in pending:
                f.cancel()
            self._pool.shutdown(wait=True, cancel_futures=True)


def run_experiment(
    config: ExperimentConfig,
    *,
    providers: Optional[Mapping[str, Provider]] = None,
    limit: Optional[int] = None,
    clock: Optional[Callable[[], float]] = None,
    resume: bool = False,
    checkpoint: Optional[RunCheckpoint] = None,
) -> RunResult:
    """Debate every filtered email under every matrix entry and score the outcome.

    Transcripts are appended to ``<output_dir>/transcripts.jsonl`` as they
    complete.  An existing non-empty transcript file is an error unless
    ``resume`` is set, in which case its config hash must match and the
    pairs it already holds are skipped.
    """
    out_path = config.transcripts_path
    config.output_dir.mkdir(parents=True, exist_ok=True)
    _repair_tail(out_path)
    # The transcript file is authoritative; a passed-in checkpoint is only checked against it.
    on_disk = RunCheckpoint.scan(out_path)
    live_hash = config.config_hash()
    if checkpoint is not None and len(checkpoint) and checkpoint.config_hash != live_hash:
        raise RunError("checkpoint was produced by a different config; refusing to mix outputs")
    if len(on_disk):
        if not resume:
            raise RunError(f"{out_path} already holds {len(on_disk)} transcripts; resume or choose another output_dir")
        if on_disk.config_hash != live_hash:
            raise RunError("checkpoint was produced by a different config; refusing to mix outputs")

    emails = prepare_emails(config, limit)
    providers = dict(providers) if providers is not None else build_providers(config)
    tasks = [
        (entry, email)
        for entry in config.matrix
        for email in emails
        if not on_disk.is_done(entry.label, email.id)
    ]
    log.info("%d debates to run (%d already complete)", len(tasks), len(on_disk))

    clock_lock = threading.Lock()

    def stamp() -> Optional[Callable[[], float]]:
        if clock is None:
            return None

        def locked():
            with clock_lock:
                return clock()

        return locked

    def work(task: tuple[MatrixEntry, EmailRecord]) -> dict[str, Any]:
        entry, email = task
        tick = stamp()
        try:
            transcript = run_debate(
                email,
                providers[entry.agent1],
                providers[entry.agent2],
                providers[entry.judge],
                entry.options,
                config_label=entry.label,
                defender_sees_round1=config.defender_sees_round1,
                include_email=config.include_email_for_judge,
                clock=tick,
            )
            record = transcript.to_dict()
        except DebateFailure as failure:
            log.warning("%s [%s]: %s", email.id, entry.label, failure)
            record = _failure_record(entry, email, failure, {"failed": tick()} if tick else {})
        record["config_hash"] = live_hash
        return record

    new_records = []
    with out_path.open("a", encoding="utf-8") as fh:
        for record in _BoundedRunner(config.parallelism).map_ordered(work, tasks):
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()
            new_records.append(record)

    all_records = read_transcripts(out_path)
    reports = score_records(all_records, exclude_ambiguous=config.exclude_ambiguous)
    write_reports(reports, config.output_dir)
    return RunResult(
        reports=reports,
        records=all_records,
        new_records=len(new_records),
        failures=sum(1 for r in all_records if r.get("error")),
    )


def resume(config: ExperimentConfig, checkpoint: RunCheckpoint, **kwargs) -> RunResult:
    """Continue a run from ``checkpoint``; refuses a checkpoint from another config."""
    if len(checkpoint) and checkpoint.config_hash != config.config_hash():
        raise RunError("checkpoint was produced by a different config; refusing to mix outputs")
    return run_experiment(config, resume=True, checkpoint=checkpoint, **kwargs)


def score_records(records: Sequence[Mapping[str, Any]], exclude_ambiguous: bool = False) -> list[EvalReport]:
    groups: dict[tuple[str, str], list[Mapping[str, Any]]] = {}
    for r in records:
        groups.setdefault((r["config_label"], r["dataset"]), []).append(r)
    reports = []
    for (label, dataset), items in groups.items():
        scored = [r for r in items if r.get("verdict")]
        ambiguous = sum(1 for r in items if not r.get("verdict") and str(r.get("error", "")).startswith("Ambiguous"))
        failed = len(items) - len(scored) - ambiguous
        if not scored and not (ambiguous and not exclude_ambiguous):
            log.warning("no scorable transcripts for %s on %s", label, dataset)
            continue
        if scored:
            counts = confusion_counts([r["verdict"]["decision"] for r in scored], [r["label"] for r in scored])
        else:
            counts = ConfusionCounts()
        reports.append(
            score_report(
                counts,
                dataset,
                label,
                single_class=len({r["label"] for r in items}) == 1,
                num_ambiguous=ambiguous,
                exclude_ambiguous=exclude_ambiguous,
                num_failed=failed,
            )
        )
    return reports


def score_file(path: Path, exclude_ambiguous: bool = False) -> list[EvalReport]:
    return score_records(read_transcripts(path), exclude_ambiguous=exclude_ambiguous)


def write_reports(reports: Sequence[EvalReport], output_dir: Path) -> None:
    output_dir = Path(output_dir)
    (output_dir / "report.txt").write_text(format_table(reports) + "\n", encoding="utf-8")
    (output_dir / "report.json").write_text(reports_to_json(reports) + "\n", encoding="utf-8")


def render_dry_run(config: ExperimentConfig, emails: Sequence[EmailRecord]) -> str:
    """Every prompt a debate would send, with placeholders for unseen replies."""
    blocks = []
    for entry in config.matrix:
        for email in emails:
            o = entry.options
            a1r1 = "<agent1 round-1 argument>"
            a2r1 = "<agent2 round-1 argument>"
            a1r2 = "<agent1 round-2 argument>"
            bundles = [
                ("agent1/round1", build_debater_prompt(email, Stance.PROSECUTOR, 1, None, o)),
                (
                    "agent2/round1",
                    build_debater_prompt(email, Stance.DEFENDER, 1, a1r1 if config.defender_sees_round1 else None, o),
                ),
                ("agent1/round2", build_debater_prompt(email, Stance.PROSECUTOR, 2, a2r1, o)),
                ("agent2/round2", build_debater_prompt(email, Stance.DEFENDER, 2, a1r2, o)),
                (
                    "judge",
                    build_judge_prompt(
                        email,
                        [a1r1, a2r1, a1r2, "<agent2 round-2 argument>"],
                        include_email=config.include_email_for_judge,
                    ),
                ),
            ]
            for stage, bundle in bundles:
                header = f"##### {entry.label} | {email.id} | {stage}"
                body = "\n".join(f"[{m.role}]\n{m.content}" for m in bundle.messages)
                blocks.append(f"{header}\n{body}")
    return "\n\n".join(blocks)
