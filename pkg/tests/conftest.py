import itertools
import json
import re
import threading

import pytest

from phishdebate.corpus import EmailRecord, Label
from phishdebate.prompts import PromptBundle
from phishdebate.providers import ScriptedProvider


def make_email(i=0, subject=None, body=None, label=Label.PHISHING, dataset="fixture"):
    return EmailRecord(
        id=f"{dataset}-{i}",
        dataset=dataset,
        subject=f"msg {i}" if subject is None else subject,
        body=f"Please review the attached document number {i}" if body is None else body,
        label=label,
    )


def synthetic_rows(n=20):
    """n equal-length emails with alternating labels; email i is phishing iff i is even."""
    return [
        {"id": f"syn-{i}", "subject": f"msg {i}", "body": f"Please review the attached document number {i}",
         "label": "phishing" if i % 2 == 0 else "ham"}
        for i in range(n)
    ]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


_SUBJECT = re.compile(r"^Subject: (.*)$", re.M)
_MSG_NUM = re.compile(r"msg (\d+)")


def agent_reply(tag):
    """Scripted debater: echoes its tag, the round and the email subject."""

    def reply(bundle: PromptBundle) -> str:
        user = bundle.user_content
        rnd = 2 if "Given your opponent's rebuttal" in user else 1
        subject = _SUBJECT.search(user).group(1)
        return f"{tag} round {rnd} argument about {subject}"

    return reply


def parity_judge(bundle: PromptBundle) -> str:
    """Phishing when the message number quoted in the arguments is even."""
    n = int(_MSG_NUM.search(bundle.user_content).group(1))
    verdict = "PHISHING" if n % 2 == 0 else "LEGITIMATE"
    return f"Agent arguments weighed for msg {n}.\nVERDICT: {verdict}"


@pytest.fixture
def scripted_trio():
    return {
        "a1": ScriptedProvider(default=agent_reply("A1"), name="a1"),
        "a2": ScriptedProvider(default=agent_reply("A2"), name="a2"),
        "judge": ScriptedProvider(default=parity_judge, name="judge"),
    }


class CounterClock:
    """Deterministic injected clock: every read advances by one second."""

    def __init__(self, start=1000.0):
        self._it = itertools.count(start)
        self._lock = threading.Lock()

    def __call__(self):
        with self._lock:
            return float(next(self._it))


@pytest.fixture
def counter_clock():
    return CounterClock()


# Acceptance summary: one PASS/FAIL/SKIP line per criterion.

_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0] if marker.args else item.name
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance_results.append((name, status))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _acceptance_results:
        terminalreporter.write_line(f"[{status}] {name}")


def config_dict(tmp_path, n=20, matrix=None, **overrides):
    """Experiment config over an n-email synthetic JSONL corpus with scripted providers."""
    data_path = write_jsonl(tmp_path / "synthetic.jsonl", synthetic_rows(n))
    cfg = {
        "datasets": [
            {"name": "synthetic", "path": str(data_path), "format": "jsonl",
             "field_map": {"id": "id", "subject": "subject", "body": "body", "label": "label"},
             "label_aliases": {"ham": "ham", "phishing": "phishing"}}
        ],
        "providers": {"a1": {"kind": "scripted"}, "a2": {"kind": "scripted"}, "judge": {"kind": "scripted"}},
        "matrix": matrix or [{"agent1": "a1", "agent2": "a2", "judge": "judge", "label": "A1-A2-J"}],
        "output_dir": str(tmp_path / "out"),
        "parallelism": 1,
        "seed": 7,
    }
    cfg.update(overrides)
    return cfg


def scripted_providers():
    return {
        "a1": ScriptedProvider(default=agent_reply("A1"), name="a1"),
        "a2": ScriptedProvider(default=agent_reply("A2"), name="a2"),
        "judge": ScriptedProvider(default=parity_judge, name="judge"),
    }
