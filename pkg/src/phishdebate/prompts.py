"""Rendering of debater and judge prompts into chat message sequences."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .corpus import EmailRecord


class Stance(str, Enum):
    PROSECUTOR = "prosecutor"  # argues phishing
    DEFENDER = "defender"  # argues legitimate

    @property
    def opponent(self) -> "Stance":
        return Stance.DEFENDER if self is Stance.PROSECUTOR else Stance.PROSECUTOR


@dataclass(frozen=True)
class PromptOptions:
    cot: bool = False
    role: bool = False

    @property
    def suffix(self) -> str:
        """Configuration-label suffix: "", "-CoT", "-Role" or "-CoT-Role"."""
        return ("-CoT" if self.cot else "") + ("-Role" if self.role else "")


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class PromptBundle:
    messages: tuple[Message, ...]

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a PromptBundle needs at least one message")
        for m in self.messages:
            if m.role not in ("system", "user", "assistant"):
                raise ValueError(f"invalid message role {m.role!r}")

    def to_wire(self) -> list[dict[str, str]]:
        return [{"role": m.role, "content": m.content} for m in self.messages]

    @property
    def user_content(self) -> str:
        return "\n\n".join(m.content for m in self.messages if m.role == "user")

    @property
    def system_content(self) -> Optional[str]:
        for m in self.messages:
            if m.role == "system":
                return m.content
        return None


INSTRUCTIONS = {
    (Stance.PROSECUTOR, 1): "Carefully analyze the following email and argue why it is likely to be a phishing attempt",
    (Stance.DEFENDER, 1): (
        "Carefully analyze the following email and argue why it is likely to be legitimate "
        "and not a phishing attempt"
    ),
    (Stance.PROSECUTOR, 2): (
        "Given your opponent's rebuttal, reinforce your position that the following email "
        "is a phishing attempt"
    ),
    (Stance.DEFENDER, 2): (
        "Given your opponent's rebuttal, reinforce your position that the following email "
        "is not a phishing attempt"
    ),
}

_COT_LEAD = "Break down your reasoning step-by-step using these guiding questions:"

# The defender list is numbered 1, 2, 4 in the published template; kept as is.
COT_QUESTIONS = {
    Stance.PROSECUTOR: "\n".join(
        [
            _COT_LEAD,
            "1. Is the language designed to invoke urgency, fear, or greed?",
            "2. Are there misleading links or unusual requests?",
            "3. Does the email resemble common phishing patterns?",
        ]
    ),
    Stance.DEFENDER: "\n".join(
        [
            _COT_LEAD,
            "1. Is the tone and language professional and consistent?",
            "2. Are the links safe and are the requests expected?",
            "4. Does the context match what a legitimate sender would send?",
        ]
    ),
}

PERSONAS = {
    Stance.PROSECUTOR: (
        "You are a senior cybersecurity analyst at a large tech company. Your job is to review "
        "suspicious emails reported by employees and determine that they are phishing attempts."
    ),
    Stance.DEFENDER: (
        "You are an email forensics expert working for an IT compliance team. Your job is to "
        "validate that a flagged email is legitimate and not a phishing attempt."
    ),
}

EMAIL_START = "=== EMAIL START ==="
EMAIL_END = "=== EMAIL END ==="
OPPONENT_START = "=== OPPONENT'S ARGUMENT START ==="
OPPONENT_END = "=== OPPONENT'S ARGUMENT END ==="

ARGUMENT_LABELS = (
    "AGENT 1 (argues phishing), ROUND 1",
    "AGENT 2 (argues legitimate), ROUND 1",
    "AGENT 1 (argues phishing), ROUND 2",
    "AGENT 2 (argues legitimate), ROUND 2",
)

JUDGE_INSTRUCTION = (
    "You are the judge of a two-round debate between two agents about a single email. "
    "Agent 1 was assigned to argue that the email is phishing; Agent 2 was assigned to argue "
    "that it is legitimate. Evaluate the strength and coherence of the four arguments below, "
    "then provide a final binary classification verdict, phishing or legitimate, with a brief "
    "justification."
)
JUDGE_FORMAT = (
    "End your reply with exactly one final line, either\n"
    "VERDICT: PHISHING\n"
    "or\n"
    "VERDICT: LEGITIMATE"
)


def render_email(email: EmailRecord) -> str:
    return f"{EMAIL_START}\nSubject: {email.subject}\n\n{email.body}\n{EMAIL_END}"


def build_debater_prompt(
    email: EmailRecord,
    stance: Stance | str,
    round: int,
    opponent_argument: Optional[str] = None,
    options: PromptOptions = PromptOptions(),
) -> PromptBundle:
    """Render one debater turn.

    The user message is the stance/round instruction, the delimited email and,
    when given, the opponent's argument; CoT questions go last.  With role
    prompting the stance persona is sent as a leading system message.
    """
    stance = Stance(stance)
    if round not in (1, 2):
        raise ValueError(f"round must be 1 or 2, got {round!r}")
    if round == 2 and opponent_argument is None:
        raise ValueError("round 2 requires the opponent's argument")
    if round == 1 and stance is Stance.PROSECUTOR and opponent_argument is not None:
        raise ValueError("the round-1 prosecutor argues first and has no opponent argument")

    parts = [INSTRUCTIONS[(stance, round)] + ".", render_email(email)]
    if opponent_argument is not None:
        parts.append(f"{OPPONENT_START}\n{opponent_argument}\n{OPPONENT_END}")
    if options.cot:
        parts.append(COT_QUESTIONS[stance])

    messages = []
    if options.role:
        messages.append(Message("system", PERSONAS[stance]))
    messages.append(Message("user", "\n\n".join(parts)))
    return PromptBundle(tuple(messages))


def build_judge_prompt(
    email: EmailRecord,
    arguments: Sequence[str],
    include_email: bool = False,
    persona: Optional[str] = None,
) -> PromptBundle:
    """Render the judge turn from the four arguments (A1-R1, A2-R1, A1-R2, A2-R2)."""
    if len(arguments) != 4:
        raise ValueError(f"the judge needs exactly four arguments, got {len(arguments)}")
    parts = [JUDGE_INSTRUCTION]
    if include_email:
        parts.append(render_email(email))
    for label, text in zip(ARGUMENT_LABELS, arguments):
        parts.append(f"=== {label} START ===\n{text}\n=== {label} END ===")
    parts.append(JUDGE_FORMAT)

    messages = []
    if persona:
        messages.append(Message("system", persona))
    messages.append(Message("user", "\n\n".join(parts)))
    return PromptBundle(tuple(messages))
