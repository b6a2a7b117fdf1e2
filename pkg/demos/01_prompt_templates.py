"""
Rendering debate prompts
========================

Every agent call is a self-contained chat request. This script prints the
four debater prompts for one email, then shows what chain-of-thought and
role prompting add on top of the baseline.
"""

from phishdebate import EmailRecord, Label, PromptOptions, Stance, build_debater_prompt, build_judge_prompt

email = EmailRecord(
    id="demo-1",
    dataset="demo",
    subject="Action required: mailbox quota exceeded",
    body="Your mailbox is 99% full. Click http://mail-quota.example.net to upgrade now or lose incoming mail.",
    label=Label.PHISHING,
)

# Round one: the prosecutor opens, the defender answers it.
prosecutor_r1 = build_debater_prompt(email, Stance.PROSECUTOR, 1)
print(prosecutor_r1.user_content)
print("-" * 72)

defender_r1 = build_debater_prompt(email, Stance.DEFENDER, 1, opponent_argument="<prosecutor round 1>")
print(defender_r1.user_content)
print("-" * 72)

# CoT appends guiding questions at the end; role prompting adds a system persona.
variants = {
    "baseline": PromptOptions(),
    "cot": PromptOptions(cot=True),
    "role": PromptOptions(role=True),
    "cot+role": PromptOptions(cot=True, role=True),
}
for name, options in variants.items():
    bundle = build_debater_prompt(email, Stance.PROSECUTOR, 2, "<defender round 1>", options)
    roles = [m.role for m in bundle.messages]
    print(f"{name:>9}: messages={roles} user chars={len(bundle.user_content)}")

print("-" * 72)
print(build_debater_prompt(email, Stance.DEFENDER, 1, options=PromptOptions(cot=True, role=True)).system_content)

# The judge only sees the four arguments unless include_email is set.
judge = build_judge_prompt(email, ["<A1 R1>", "<A2 R1>", "<A1 R2>", "<A2 R2>"])
print("-" * 72)
print(judge.user_content)
