"""Phishing email classification by a two-agent debate adjudicated by a judge model."""

from .corpus import (
    CorpusError,
    DatasetSummary,
    EmailRecord,
    Label,
    LengthUnit,
    filter_corpus,
    length_thresholds,
    load_corpus,
    measure_length,
    percentile_threshold,
    summarize,
)
from .debate import (
    AmbiguousVerdict,
    Argument,
    DebateFailure,
    DebateTranscript,
    Decision,
    Verdict,
    parse_verdict,
    run_debate,
)
from .metrics import ConfusionCounts, EvalReport, confusion_counts, format_table, score_report
from .prompts import PromptBundle, PromptOptions, Stance, build_debater_prompt, build_judge_prompt
from .providers import (
    CompletionResult,
    HTTPProvider,
    ProviderConfig,
    ProviderError,
    ScriptedProvider,
    fingerprint,
)
from .config import ConfigError, ExperimentConfig
from .runner import RunCheckpoint, RunError, resume, run_experiment, score_file

__version__ = "0.1.0"
