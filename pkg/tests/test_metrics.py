import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phishdebate.metrics import (
    ConfusionCounts,
    EvalReport,
    confusion_counts,
    format_cell,
    format_latex_rows,
    format_table,
    reports_to_json,
    score_report,
)

P, H, L = "phishing", "ham", "legitimate"


def brute_force(preds, labels):
    """Independent tally straight from the definitions, in exact rationals."""
    pairs = list(zip(preds, labels))
    tp = sum(1 for p, t in pairs if p == P and t == P)
    fp = sum(1 for p, t in pairs if p == P and t != P)
    fn = sum(1 for p, t in pairs if p != P and t == P)
    tn = len(pairs) - tp - fp - fn
    acc = Fraction(tp + tn, len(pairs))
    prec = Fraction(tp, tp + fp) if tp + fp else None
    rec = Fraction(tp, tp + fn) if tp + fn else None
    if len(set(labels)) == 1:
        f1 = None
    elif prec is not None and rec is not None and prec + rec:
        f1 = 2 * prec * rec / (prec + rec)
    else:
        f1 = Fraction(0)
    return (tp, fp, tn, fn), acc, prec, rec, f1


def _close(x, y):
    if x is None or y is None:
        return x is None and y is None
    return abs(Fraction(x) - y) <= Fraction(1, 10**12)


def test_hand_example():
    preds = [P, P, P, L, L]
    labels = [P, P, H, P, H]
    counts = confusion_counts(preds, labels)
    assert counts == ConfusionCounts(tp=2, fp=1, tn=1, fn=1)
    r = score_report(counts, "d", "c", single_class=False)
    assert r.accuracy == pytest.approx(0.6, abs=1e-12)
    assert r.precision == pytest.approx(2 / 3, abs=1e-12)
    assert r.recall == pytest.approx(2 / 3, abs=1e-12)
    assert r.f1 == pytest.approx(2 / 3, abs=1e-12)


def test_perfect_and_saturated():
    counts = confusion_counts([P, L, P, L], [P, H, P, H])
    assert counts.fp == counts.fn == 0
    r = score_report(counts, "d", "c", single_class=False)
    assert r.accuracy == 1.0 and r.f1 == 1.0
    sat = confusion_counts([P] * 6, [P] * 6)
    assert sat == ConfusionCounts(tp=6)
    assert score_report(sat, "d", "c", single_class=True).f1 is None


def test_errors():
    with pytest.raises(ValueError):
        confusion_counts([P], [P, H])
    with pytest.raises(ValueError):
        confusion_counts([], [])
    with pytest.raises(ValueError):
        confusion_counts(["maybe"], [P])
    with pytest.raises(ValueError):
        score_report(ConfusionCounts(), "d", "c", single_class=False)


def test_zero_denominators_not_reported():
    r = score_report(confusion_counts([L, L], [P, H]), "d", "c", single_class=False)
    assert r.precision is None and r.recall == 0.0 and r.f1 == 0.0


def test_ambiguous_handling():
    counts = ConfusionCounts(tp=3, tn=5)
    default = score_report(counts, "d", "c", single_class=False, num_ambiguous=2)
    assert default.accuracy == pytest.approx(0.8) and default.num_ambiguous == 2
    excluded = score_report(counts, "d", "c", single_class=False, num_ambiguous=2, exclude_ambiguous=True)
    assert excluded.accuracy == 1.0


def test_oracle_random_vectors():
    rng = random.Random(20240601)
    for _ in range(300):
        n = rng.randint(1, 200)
        labels = [rng.choice([P, H]) for _ in range(n)]
        preds = [rng.choice([P, L]) for _ in range(n)]
        counts_o, acc, prec, rec, f1 = brute_force(preds, labels)
        c = confusion_counts(preds, labels)
        assert (c.tp, c.fp, c.tn, c.fn) == counts_o
        r = score_report(c, "d", "c", single_class=len(set(labels)) == 1)
        assert _close(r.accuracy, acc) and _close(r.precision, prec) and _close(r.recall, rec) and _close(r.f1, f1)


pairs = st.lists(st.tuples(st.sampled_from([P, L]), st.sampled_from([P, H])), min_size=1, max_size=60)


@given(pairs, st.randoms())
def test_permutation_invariance(items, rnd):
    preds, labels = zip(*items)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    sp, sl = zip(*shuffled)
    assert confusion_counts(preds, labels) == confusion_counts(sp, sl)


@given(pairs)
def test_positive_class_swap(items):
    preds, labels = zip(*items)
    c = confusion_counts(preds, labels)
    flip_pred = {P: L, L: P}
    flip_label = {P: H, H: P}
    s = confusion_counts([flip_pred[p] for p in preds], [flip_label[t] for t in labels])
    assert (s.tp, s.fp, s.tn, s.fn) == (c.tn, c.fn, c.tp, c.fp)
    a = score_report(c, "d", "c", single_class=False).accuracy
    b = score_report(s, "d", "c", single_class=False).accuracy
    assert a == b


@given(pairs)
def test_f1_not_reported_iff_single_class(items):
    preds, labels = zip(*items)
    single = len(set(labels)) == 1
    r = score_report(confusion_counts(preds, labels), "d", "c", single_class=single)
    assert (r.f1 is None) == single


def test_table_rendering():
    uot = score_report(ConfusionCounts(tp=3000, tn=6891, fp=50, fn=59), "UoT", "GPT-4-LLaMA-2-GPT-4", False)
    nig = score_report(ConfusionCounts(tp=9854, fn=146), "Nigerian_Fraud", "GPT-4-LLaMA-2-GPT-4", True)
    assert format_cell(uot) == "98.91% / 0.98"
    assert format_cell(nig) == "98.54% / /"
    latex = format_latex_rows([uot, nig])
    assert latex == r"GPT-4-LLaMA-2-GPT-4 & 98.91\% & 0.98 & 98.54\% & / \\"
    table = format_table([uot, nig])
    assert "UoT" in table.splitlines()[0] and "98.91% / 0.98" in table and "98.54% / /" in table


def test_report_json_round_trip():
    r = score_report(ConfusionCounts(tp=1, fp=2, tn=3, fn=4), "d", "c", False, num_ambiguous=1, num_failed=2)
    [data] = json.loads(reports_to_json([r]))
    assert data["f1"] == pytest.approx(2 / 8) and data["counts"] == {"tp": 1, "fp": 2, "tn": 3, "fn": 4}
    assert EvalReport.from_dict(data) == r
