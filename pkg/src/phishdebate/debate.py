"""Two-round debate procedure, judge adjudication and verdict parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from .corpus import EmailRecord
from .prompts import PromptOptions, Stance, build_debater_prompt, build_judge_prompt
from .providers import Provider, ProviderError

SCHEMA_VERSION = 1


class Decision(str, Enum):
    PHISHING = "phishing"
    LEGITIMATE = "legitimate"


class AmbiguousVerdict(ValueError):
    """The judge reply carries neither a verdict marker nor a decision keyword."""


class DebateFailure(RuntimeError):
    """A provider call failed; ``stage`` names the call, e.g. ``"agent2/round2"``."""

    def __init__(self, email_id: str, stage: str, cause: Exception):
        super().__init__(f"{email_id}: {stage} failed: {cause}")
        self.email_id = email_id
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class Argument:
    agent: str
    round: int
    stance: Stance
    text: str

    def __post_init__(self):
        expected = {"agent1": Stance.PROSECUTOR, "agent2": Stance.DEFENDER}.get(self.agent)
        if expected is None or Stance(self.stance) is not expected:
            raise ValueError(f"{self.agent} cannot hold stance {self.stance}")
        if self.round not in (1, 2):
            raise ValueError(f"invalid round {self.round}")

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent, "round": self.round, "stance": Stance(self.stance).value, "text": self.text}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Argument":
        return cls(agent=data["agent"], round=data["round"], stance=Stance(data["stance"]), text=data["text"])


_ARGUMENT_ORDER = (("agent1", 1), ("agent2", 1), ("agent1", 2), ("agent2", 2))


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    justification: str
    parse_path: str  # "marker" or "fallback"


@dataclass
class DebateTranscript:
    email_id: str
    arguments: tuple[Argument, ...]
    judge_text: str
    verdict: Optional[Verdict]
    options: PromptOptions
    config_label: str = ""
    dataset: str = ""
    label: str = ""
    error: Optional[str] = None
    attempts_per_call: tuple[int, ...] = ()
    clock: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        order = tuple((a.agent, a.round) for a in self.arguments)
        if order != _ARGUMENT_ORDER:
            raise ValueError(f"a transcript needs the four arguments in order, got {order}")

    @property
    def decision(self) -> Optional[Decision]:
        return self.verdict.decision if self.verdict else None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "config_label": self.config_label,
            "dataset": self.dataset,
            "email_id": self.email_id,
            "label": self.label,
            "options": {"cot": self.options.cot, "role": self.options.role},
            "arguments": [a.to_dict() for a in self.arguments],
            "judge_text": self.judge_text,
            "verdict": None
            if self.verdict is None
            else {"decision": self.verdict.decision.value, "parse_path": self.verdict.parse_path},
            "attempts_per_call": list(self.attempts_per_call),
            "clock": dict(self.clock),
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DebateTranscript":
        verdict = None
        if data.get("verdict") is not None:
            # Justification is not stored; it is recoverable from judge_text.
            verdict = parse_verdict(data["judge_text"])
            if verdict.decision.value != data["verdict"]["decision"]:
                raise ValueError(f"{data['email_id']}: stored verdict disagrees with judge_text")
        return cls(
            email_id=data["email_id"],
            arguments=tuple(Argument.from_dict(a) for a in data["arguments"]),
            judge_text=data["judge_text"],
            verdict=verdict,
            options=PromptOptions(**data["options"]),
            config_label=data.get("config_label", ""),
            dataset=data.get("dataset", ""),
            label=data.get("label", ""),
            error=data.get("error"),
            attempts_per_call=tuple(data.get("attempts_per_call", ())),
            clock=dict(data.get("clock", {})),
        )


_MARKER = re.compile(r"^[\s*_`#>]*VERDICT\s*:\s*[*_`]*\s*(PHISHING|LEGITIMATE)\b[\s*_`.!]*$", re.I | re.M)

# Fallback keywords, highest precedence first. A lower-precedence hit that
# overlaps a higher-precedence one is discarded ("not a phishing attempt" is
# never read as "phishing attempt"); of the survivors the last one wins.
FALLBACK_KEYWORDS: tuple[tuple[int, str, Decision], ...] = (
    (0, r"\bnot\s+a\s+phishing\b", Decision.LEGITIMATE),
    (0, r"\bnot\s+phishing\b", Decision.LEGITIMATE),
    (0, r"\bnot\s+legitimate\b", Decision.PHISHING),
    (0, r"\billegitimate\b", Decision.PHISHING),
    (1, r"\bphishing\s+attempt\b", Decision.PHISHING),
    (1, r"\bis\s+phishing\b", Decision.PHISHING),
    (1, r"\blegitimate\b", Decision.LEGITIMATE),
)


def _fallback_decision(text: str) -> Optional[Decision]:
    hits = []
    for precedence, pattern, decision in FALLBACK_KEYWORDS:
        for m in re.finditer(pattern, text, re.I):
            hits.append((precedence, m.start(), m.end(), decision))
    survivors = [
        h
        for h in hits
        if not any(o[0] < h[0] and o[1] < h[2] and h[1] < o[2] for o in hits)
    ]
    if not survivors:
        return None
    return max(survivors, key=lambda h: (h[1], -h[0]))[3]


def parse_verdict(judge_text: str) -> Verdict:
    markers = list(_MARKER.finditer(judge_text))
    if markers:
        last = markers[-1]
        justification = (judge_text[: last.start()] + judge_text[last.end() :]).strip()
        return Verdict(Decision(last.group(1).lower()), justification, "marker")
    decision = _fallback_decision(judge_text)
    if decision is None:
        raise AmbiguousVerdict("judge reply has no verdict marker and no decision keyword")
    return Verdict(decision, judge_text.strip(), "fallback")


def run_debate(
    email: EmailRecord,
    agent1: Provider,
    agent2: Provider,
    judge: Provider,
    options: PromptOptions = PromptOptions(),
    *,
    config_label: str = "",
    defender_sees_round1: bool = True,
    include_email: bool = False,
    judge_persona: Optional[str] = None,
    clock: Optional[Callable[[], float]] = None,
) -> DebateTranscript:
    """Run A1-R1, A2-R1, A1-R2, A2-R2 and the judge, strictly in that order.

    A provider error raises DebateFailure naming the failing call; later calls
    are not made.  An unparseable judge reply yields a transcript with no
    verdict and ``error`` set.
    """
    if not (email.subject or email.body):
        raise ValueError(f"{email.id}: email has neither subject nor body")
    clock_marks: dict[str, float] = {}
    if clock is not None:
        clock_marks["started"] = clock()
    attempts: list[int] = []

    def call(provider: Provider, stage: str, bundle) -> str:
        try:
            result = provider.complete(bundle)
        except ProviderError as exc:
            raise DebateFailure(email.id, stage, exc) from exc
        attempts.append(result.attempts)
        return result.text

    a1r1 = call(
        agent1, "agent1/round1", build_debater_prompt(email, Stance.PROSECUTOR, 1, None, options)
    )
    a2r1 = call(
        agent2,
        "agent2/round1",
        build_debater_prompt(email, Stance.DEFENDER, 1, a1r1 if defender_sees_round1 else None, options),
    )
    a1r2 = call(agent1, "agent1/round2", build_debater_prompt(email, Stance.PROSECUTOR, 2, a2r1, options))
    a2r2 = call(agent2, "agent2/round2", build_debater_prompt(email, Stance.DEFENDER, 2, a1r2, options))
    texts = [a1r1, a2r1, a1r2, a2r2]
    judge_text = call(
        judge, "judge", build_judge_prompt(email, texts, include_email=include_email, persona=judge_persona)
    )

    arguments = tuple(
        Argument(agent, rnd, Stance.PROSECUTOR if agent == "agent1" else Stance.DEFENDER, text)
        for (agent, rnd), text in zip(_ARGUMENT_ORDER, texts)
    )
    try:
        verdict: Optional[Verdict] = parse_verdict(judge_text)
        error = None
    except AmbiguousVerdict as exc:
        verdict, error = None, f"AmbiguousVerdict: {exc}"
    if clock is not None:
        clock_marks["finished"] = clock()
    return DebateTranscript(
        email_id=email.id,
        arguments=arguments,
        judge_text=judge_text,
        verdict=verdict,
        options=options,
        config_label=config_label,
        dataset=email.dataset,
        label=email.label.value,
        error=error,
        attempts_per_call=tuple(attempts),
        clock=clock_marks,
    )
