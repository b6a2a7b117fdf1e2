"""
A debate with scripted providers
================================

ScriptedProvider answers from a fixed rule instead of a model, which makes
the debate protocol easy to inspect: four arguments in a fixed order, then
the judge's reply and the parsed verdict.
"""

import json

from phishdebate import EmailRecord, Label, ScriptedProvider, parse_verdict, run_debate

email = EmailRecord(
    id="demo-2",
    dataset="demo",
    subject="Invoice 4471 attached",
    body="Hi, please find attached the invoice for last month's consulting work. Regards, Dana",
    label=Label.HAM,
)


def prosecutor(bundle):
    if "opponent's rebuttal" in bundle.user_content:
        return "The defence ignores that the attachment type is never stated."
    return "Unexpected invoices are a classic lure for malicious attachments."


def defender(bundle):
    if "opponent's rebuttal" in bundle.user_content:
        return "Nothing in the message asks for credentials or payment."
    return "The tone is ordinary and there are no links or urgency cues."


judge = ScriptedProvider(default="The defence is more concrete.\nVERDICT: LEGITIMATE")

transcript = run_debate(email, ScriptedProvider(default=prosecutor), ScriptedProvider(default=defender), judge)

for arg in transcript.arguments:
    print(f"{arg.agent} round {arg.round} ({arg.stance.value}): {arg.text}")
print("judge:", transcript.judge_text.replace("\n", " | "))
print("verdict:", transcript.verdict.decision.value, "via", transcript.verdict.parse_path)

# Judges that ignore the marker instruction are handled by keyword fallback.
print(parse_verdict("Weighing both sides, this is not a phishing attempt."))

# Transcripts serialize to one JSON object per debate.
print(json.dumps(transcript.to_dict(), indent=2)[:400], "...")
