"""
Running an experiment and resuming it
=====================================

The runner debates every filtered email under every matrix entry and
appends one JSON line per debate. Here the first run is cut short on
purpose; resuming picks up the remaining emails without repeating any.
"""

import json
import tempfile
from pathlib import Path

from phishdebate import ExperimentConfig, RunCheckpoint, ScriptedProvider, resume, run_experiment
from phishdebate.metrics import format_table

workdir = Path(tempfile.mkdtemp(prefix="phishdebate-demo-"))
rows = [
    {"subject": f"notice {i}", "body": f"Please confirm request number {i} today", "label": 1 - i % 2}
    for i in range(12)
]
(workdir / "toy.jsonl").write_text("".join(json.dumps(r) + "\n" for r in rows))

config = ExperimentConfig.from_dict(
    {
        "datasets": [
            {"name": "toy", "path": "toy.jsonl", "format": "jsonl",
             "field_map": {"subject": "subject", "body": "body", "label": "label"},
             "label_aliases": {"0": "ham", "1": "phishing"}}
        ],
        "providers": {"pro": {"kind": "scripted"}, "con": {"kind": "scripted"}, "judge": {"kind": "scripted"}},
        "matrix": [
            {"agent1": "pro", "agent2": "con", "judge": "judge"},
            {"agent1": "pro", "agent2": "con", "judge": "judge", "options": {"cot": True}},
        ],
        "output_dir": "out",
        "parallelism": 2,
    },
    base_dir=workdir,
)


class Interrupted(BaseException):
    pass


def judge_rule(bundle):
    # even-numbered notices are called phishing
    n = int(bundle.user_content.split("notice ")[1].split()[0])
    return "VERDICT: PHISHING" if n % 2 == 0 else "VERDICT: LEGITIMATE"


def providers(stop_after=None):
    calls = {"n": 0}

    def judge(bundle):
        calls["n"] += 1
        if stop_after is not None and calls["n"] > stop_after:
            raise Interrupted()
        return judge_rule(bundle)

    echo = lambda bundle: "notice " + bundle.user_content.split("Subject: notice ")[1].split()[0]
    return {
        "pro": ScriptedProvider(default=echo),
        "con": ScriptedProvider(default=echo),
        "judge": ScriptedProvider(default=judge),
    }


try:
    run_experiment(config, providers=providers(stop_after=9))
except Interrupted:
    pass
checkpoint = RunCheckpoint.scan(config.transcripts_path)
print(f"interrupted with {len(checkpoint)} transcripts on disk")

result = resume(config, checkpoint, providers=providers())
print(f"resumed: {result.new_records} new, {len(result.records)} total")
print(format_table(result.reports))
print("output in", config.output_dir)
