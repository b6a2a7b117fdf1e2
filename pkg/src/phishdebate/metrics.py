"""Binary classification scoring with phishing as the positive class."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

NOT_REPORTED = "/"


def _is_phishing(value) -> bool:
    v = getattr(value, "value", value)
    if v == "phishing":
        return True
    if v in ("ham", "legitimate"):
        return False
    raise ValueError(f"not a class label: {value!r}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def confusion_counts(predictions: Sequence, labels: Sequence) -> ConfusionCounts:
    """Tally predictions ("phishing"/"legitimate") against labels ("phishing"/"ham")."""
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels")
    if not labels:
        raise ValueError("cannot score an empty set")
    tp = fp = tn = fn = 0
    for pred, truth in zip(predictions, labels):
        p, t = _is_phishing(pred), _is_phishing(truth)
        if p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


@dataclass(frozen=True)
class EvalReport:
    """Scores for one dataset under one configuration.

    ``precision``, ``recall`` and ``f1`` are None when not reported: F1 for a
    single-class ground truth, and any ratio whose denominator is zero.
    """

    dataset: str
    config_label: str
    accuracy: float
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    counts: ConfusionCounts
    num_ambiguous: int = 0
    num_failed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(**{**data, "counts": ConfusionCounts(**data["counts"])})


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def score_report(
    counts: ConfusionCounts,
    dataset: str,
    config_label: str,
    single_class: bool,
    num_ambiguous: int = 0,
    exclude_ambiguous: bool = False,
    num_failed: int = 0,
) -> EvalReport:
    """Derive accuracy/precision/recall/F1.

    Ambiguous verdicts sit outside the confusion counts; by default they stay
    in the accuracy denominator (counted as wrong).
    """
    denominator = counts.total + (0 if exclude_ambiguous else num_ambiguous)
    if denominator <= 0:
        raise ValueError("cannot score a report with zero items")
    f1 = None if single_class else _ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn)
    return EvalReport(
        dataset=dataset,
        config_label=config_label,
        accuracy=(counts.tp + counts.tn) / denominator,
        precision=_ratio(counts.tp, counts.tp + counts.fp),
        recall=_ratio(counts.tp, counts.tp + counts.fn),
        f1=f1,
        counts=counts,
        num_ambiguous=num_ambiguous,
        num_failed=num_failed,
    )


def format_accuracy(value: float) -> str:
    return f"{value * 100:.2f}%"


def format_f1(value: Optional[float]) -> str:
    return NOT_REPORTED if value is None else f"{value:.2f}"


def format_cell(report: EvalReport) -> str:
    return f"{format_accuracy(report.accuracy)} / {format_f1(report.f1)}"


def _grid(reports: Sequence[EvalReport]):
    datasets: list[str] = []
    configs: list[str] = []
    cells: dict[tuple[str, str], EvalReport] = {}
    for r in reports:
        if r.dataset not in datasets:
            datasets.append(r.dataset)
        if r.config_label not in configs:
            configs.append(r.config_label)
        cells[(r.config_label, r.dataset)] = r
    return datasets, configs, cells


def format_table(reports: Sequence[EvalReport]) -> str:
    """Plain-text grid: one row per configuration, "Acc / F1" per dataset."""
    datasets, configs, cells = _grid(reports)
    label_w = max([len("Configuration")] + [len(c) for c in configs])
    col_w = max([16] + [len(d) for d in datasets])
    header = "Configuration".ljust(label_w) + "".join(f" | {d:^{col_w}}" for d in datasets)
    lines = [header, "-" * len(header)]
    for c in configs:
        row = c.ljust(label_w)
        for d in datasets:
            cell = format_cell(cells[(c, d)]) if (c, d) in cells else "-"
            row += f" | {cell:^{col_w}}"
        lines.append(row)
    return "\n".join(lines)


def format_latex_rows(reports: Sequence[EvalReport]) -> str:
    """LaTeX tabular body rows in the ``Acc & F1`` layout, "/" for unreported F1."""
    datasets, configs, cells = _grid(reports)
    lines = []
    for c in configs:
        parts = [c.replace("_", r"\_")]
        for d in datasets:
            r = cells.get((c, d))
            if r is None:
                parts += ["-", "-"]
            else:
                parts += [format_accuracy(r.accuracy).replace("%", r"\%"), format_f1(r.f1)]
        lines.append(" & ".join(parts) + r" \\")
    return "\n".join(lines)


def reports_to_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
