"""
Length filtering and dataset summaries
======================================

Each dataset is cut at its own 75th-percentile length (nearest rank). The
length unit is configurable; the three units give different cuts.
"""

import random

from phishdebate.corpus import (
    EmailRecord,
    Label,
    LengthUnit,
    filter_corpus,
    format_summary_table,
    length_thresholds,
    summarize,
)

rng = random.Random(3)
words = "account verify password invoice meeting schedule urgent update click review".split()


def fake_email(dataset, i, mean_words):
    n = max(1, int(rng.expovariate(1 / mean_words)))
    return EmailRecord(
        id=f"{dataset}-{i}",
        dataset=dataset,
        subject=" ".join(rng.choices(words, k=3)),
        body=" ".join(rng.choices(words, k=n)),
        label=rng.choice(list(Label)),
    )


corpus = [fake_email("short", i, 20) for i in range(200)] + [fake_email("long", i, 400) for i in range(300)]

print(format_summary_table(summarize(corpus)))
for unit in LengthUnit:
    kept = filter_corpus(corpus, unit, 75)
    print(f"\n{unit.value}: thresholds {length_thresholds(corpus, unit, 75)}, kept {len(kept)} of {len(corpus)}")
    print(format_summary_table(summarize(kept, unit)))
