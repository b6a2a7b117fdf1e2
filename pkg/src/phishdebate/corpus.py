"""Labeled email corpora: loading, length measurement, percentile filtering, summaries."""

from __future__ import annotations

import csv
import json
import math
import statistics
import sys
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CorpusError(ValueError):
    """Raised when a corpus file cannot be turned into EmailRecords."""


class Label(str, Enum):
    HAM = "ham"
    PHISHING = "phishing"


class LengthUnit(str, Enum):
    WHITESPACE_TOKENS = "whitespace_tokens"
    CHARACTERS = "characters"
    CHARS_DIV_4 = "chars_div_4"


@dataclass(frozen=True)
class EmailRecord:
    id: str
    dataset: str
    subject: str
    body: str
    label: Label


@dataclass(frozen=True)
class DatasetSummary:
    name: str
    size: int
    avg_length: float
    p75_length: float
    num_ham: int
    num_phishing: int


DEFAULT_LABEL_ALIASES: dict[str, Label] = {"ham": Label.HAM, "phishing": Label.PHISHING}

# Column layouts for the five corpora used in the experiments. The curated
# collection ships CSVs with sender/receiver/date/subject/body/label/urls and
# 0/1 labels; the UoT validation set ships "Email Text"/"Email Type".
CURATED_FIELD_MAP = {"subject": "subject", "body": "body", "label": "label"}
CURATED_LABEL_ALIASES = {"0": "ham", "1": "phishing"}
DATASET_PRESETS: dict[str, dict] = {
    "UoT": {
        "field_map": {"body": "Email Text", "label": "Email Type"},
        "label_aliases": {"Safe Email": "ham", "Phishing Email": "phishing"},
    },
    "Ling": {"field_map": CURATED_FIELD_MAP, "label_aliases": CURATED_LABEL_ALIASES},
    "Nazario_5": {"field_map": CURATED_FIELD_MAP, "label_aliases": CURATED_LABEL_ALIASES},
    "Nigerian_Fraud": {"field_map": CURATED_FIELD_MAP, "label_aliases": CURATED_LABEL_ALIASES},
    "SpamAssasin": {"field_map": CURATED_FIELD_MAP, "label_aliases": CURATED_LABEL_ALIASES},
}


def _normalize_aliases(aliases: Mapping[str, str | Label] | None) -> dict[str, Label]:
    if aliases is None:
        return dict(DEFAULT_LABEL_ALIASES)
    out = {}
    for raw, target in aliases.items():
        try:
            out[str(raw).strip()] = Label(target)
        except ValueError:
            raise CorpusError(f"label alias {raw!r} maps to unknown class {target!r}") from None
    return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return str(value)


def load_corpus(
    path: str | Path,
    format: str,
    field_map: Mapping[str, str],
    label_aliases: Mapping[str, str | Label] | None = None,
    dataset: str | None = None,
    delimiter: str = ",",
) -> list[EmailRecord]:
    """Load a CSV or JSONL corpus into EmailRecords.

    ``field_map`` maps the logical fields ``body`` and ``label`` (required) and
    ``subject`` and ``id`` (optional) onto source column names.  Label values
    are looked up verbatim (after stripping surrounding whitespace) in
    ``label_aliases``; anything missing from the table is an error.  Records
    without an id column get ``"<dataset>-<row index>"``.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    for key in ("body", "label"):
        if key not in field_map:
            raise CorpusError(f"field_map is missing required field {key!r}")
    unknown = set(field_map) - {"id", "subject", "body", "label"}
    if unknown:
        raise CorpusError(f"field_map has unknown fields: {sorted(unknown)}")
    aliases = _normalize_aliases(label_aliases)
    dataset = dataset or path.stem

    if format == "csv":
        rows = _read_csv(path, delimiter)
    elif format == "jsonl":
        rows = _read_jsonl(path)
    else:
        raise CorpusError(f"unsupported corpus format {format!r}")

    records: list[EmailRecord] = []
    seen: set[str] = set()
    for index, (rownum, row) in enumerate(rows):
        for key in ("body", "label"):
            if field_map[key] not in row:
                raise CorpusError(f"{path}: row {rownum}: missing column {field_map[key]!r}")
        raw_label = _cell(row[field_map["label"]]).strip()
        if raw_label not in aliases:
            raise CorpusError(f"{path}: row {rownum}: unmappable label value {raw_label!r}")
        if "id" in field_map:
            record_id = _cell(row.get(field_map["id"])).strip()
            if not record_id:
                raise CorpusError(f"{path}: row {rownum}: empty id")
        else:
            record_id = f"{dataset}-{index}"
        if record_id in seen:
            raise CorpusError(f"{path}: row {rownum}: duplicate id {record_id!r}")
        seen.add(record_id)
        subject = _cell(row.get(field_map["subject"])) if "subject" in field_map else ""
        records.append(
            EmailRecord(
                id=record_id,
                dataset=dataset,
                subject=subject,
                body=_cell(row[field_map["body"]]),
                label=aliases[raw_label],
            )
        )
    return records


def _read_csv(path: Path, delimiter: str):
    # Bodies of some corpora exceed the default 128 KiB field limit.
    csv.field_size_limit(min(sys.maxsize, 2**31 - 1))
    with path.open(newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise CorpusError(f"{path}: malformed header: {exc}") from None
        rownum = 1
        while True:
            try:
                values = next(reader)
            except StopIteration:
                return
            except csv.Error as exc:
                raise CorpusError(f"{path}: row {rownum + 1}: malformed row: {exc}") from None
            rownum += 1
            if not values:
                continue
            if len(values) != len(header):
                raise CorpusError(
                    f"{path}: row {rownum}: malformed row: expected {len(header)} fields, got {len(values)}"
                )
            yield rownum, dict(zip(header, values))


def _read_jsonl(path: Path):
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: row {lineno}: malformed row: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}: row {lineno}: malformed row: expected a JSON object")
            yield lineno, obj


def measure_length(record: EmailRecord, unit: LengthUnit | str = LengthUnit.WHITESPACE_TOKENS) -> int:
    unit = LengthUnit(unit)
    text = " ".join(part for part in (record.subject, record.body) if part)
    if unit is LengthUnit.WHITESPACE_TOKENS:
        return len(text.split())
    if unit is LengthUnit.CHARACTERS:
        return len(text)
    return len(text) // 4


def _exact(p: float | int | Fraction) -> Fraction:
    if isinstance(p, float):
        return Fraction(repr(p))
    return Fraction(p)


def percentile_threshold(lengths: Sequence[int], p: float = 75) -> int:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    if not lengths:
        raise ValueError("percentile of an empty list is undefined")
    pct = _exact(p)
    if not 0 < pct <= 100:
        raise ValueError(f"percentile must be in (0, 100], got {p}")
    rank = math.ceil(pct * len(lengths) / 100)
    return sorted(lengths)[rank - 1]


def _by_dataset(corpus: Iterable[EmailRecord]) -> dict[str, list[EmailRecord]]:
    groups: dict[str, list[EmailRecord]] = {}
    for record in corpus:
        groups.setdefault(record.dataset, []).append(record)
    return groups


def length_thresholds(
    corpus: Sequence[EmailRecord],
    unit: LengthUnit | str = LengthUnit.WHITESPACE_TOKENS,
    p: float = 75,
) -> dict[str, int]:
    """Per-dataset nearest-rank length threshold."""
    return {
        name: percentile_threshold([measure_length(r, unit) for r in records], p)
        for name, records in _by_dataset(corpus).items()
    }


def filter_corpus(
    corpus: Sequence[EmailRecord],
    unit: LengthUnit | str = LengthUnit.WHITESPACE_TOKENS,
    p: float = 75,
    thresholds: Mapping[str, int] | None = None,
) -> list[EmailRecord]:
    """Keep records no longer than their own dataset's p-th percentile length.

    Refiltering the output recomputes the percentile on a smaller set and
    usually drops more records; pass the ``thresholds`` of the first pass to
    reapply the same cut.
    """
    if not corpus:
        raise ValueError("cannot filter an empty corpus")
    if thresholds is None:
        thresholds = length_thresholds(corpus, unit, p)
    return [r for r in corpus if measure_length(r, unit) <= thresholds[r.dataset]]


def summarize(
    corpus: Sequence[EmailRecord], unit: LengthUnit | str = LengthUnit.WHITESPACE_TOKENS
) -> list[DatasetSummary]:
    summaries = []
    for name, records in _by_dataset(corpus).items():
        lengths = [measure_length(r, unit) for r in records]
        num_ham = sum(r.label is Label.HAM for r in records)
        summaries.append(
            DatasetSummary(
                name=name,
                size=len(records),
                avg_length=statistics.fmean(lengths),
                p75_length=float(percentile_threshold(lengths, 75)),
                num_ham=num_ham,
                num_phishing=len(records) - num_ham,
            )
        )
    return summaries


def format_summary_table(summaries: Sequence[DatasetSummary]) -> str:
    header = f"{'Dataset':<16} {'Size':>6} {'Avg':>10} {'75%':>10} {'Ham':>6} {'Phishing':>9}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s.name:<16} {s.size:>6} {s.avg_length:>10.2f} {s.p75_length:>10.2f} "
            f"{s.num_ham:>6} {s.num_phishing:>9}"
        )
    return "\n".join(lines)


def summaries_to_json(summaries: Sequence[DatasetSummary]) -> str:
    return json.dumps([asdict(s) for s in summaries], indent=2)
