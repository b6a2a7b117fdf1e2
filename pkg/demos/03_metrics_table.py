"""
Scoring verdicts
================

Phishing is the positive class. When a dataset has only one ground-truth
class, F1 is not reported and is rendered as "/".
"""

from phishdebate.metrics import confusion_counts, format_latex_rows, format_table, score_report

labels = ["phishing", "phishing", "ham", "phishing", "ham"]
preds = ["phishing", "phishing", "phishing", "legitimate", "legitimate"]
counts = confusion_counts(preds, labels)
print(counts)
print(score_report(counts, "toy", "demo", single_class=False))

reports = [
    score_report(confusion_counts(preds, labels), "Mixed", "A-B-A", single_class=False),
    score_report(confusion_counts(["phishing"] * 9 + ["legitimate"], ["phishing"] * 10), "AllPhish", "A-B-A", True),
    score_report(confusion_counts(["phishing"] * 5, labels), "Mixed", "B-A-A", single_class=False),
    score_report(confusion_counts(["phishing"] * 10, ["phishing"] * 10), "AllPhish", "B-A-A", True),
]
print()
print(format_table(reports))
print()
print(format_latex_rows(reports))
