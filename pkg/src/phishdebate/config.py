"""Experiment configuration: JSON loading, validation and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .corpus import DATASET_PRESETS, LengthUnit
from .prompts import PromptOptions
from .providers import ProviderConfig, ProviderConfigError


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: Path
    format: str
    field_map: dict[str, str]
    label_aliases: dict[str, str]
    delimiter: str = ","


@dataclass(frozen=True)
class MatrixEntry:
    agent1: str
    agent2: str
    judge: str
    options: PromptOptions
    label: str


@dataclass
class ExperimentConfig:
    datasets: list[DatasetSpec]
    providers: dict[str, dict[str, Any]]
    matrix: list[MatrixEntry]
    output_dir: Path
    length_unit: LengthUnit = LengthUnit.WHITESPACE_TOKENS
    percentile: float = 75
    parallelism: int = 1
    include_email_for_judge: bool = False
    defender_sees_round1: bool = True
    exclude_ambiguous: bool = False
    shuffle: bool = False
    seed: int = 0
    raw: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def transcripts_path(self) -> Path:
        return self.output_dir / "transcripts.jsonl"

    def config_hash(self) -> str:
        """Hash of everything that affects results; parallelism and output_dir are excluded."""
        relevant = {k: v for k, v in self.raw.items() if k not in ("parallelism", "output_dir")}
        blob = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Optional[Path] = None) -> "ExperimentConfig":
        data = copy.deepcopy(data)
        base_dir = Path(base_dir or ".")
        known = {
            "datasets", "providers", "matrix", "output_dir", "length_unit", "percentile", "parallelism",
            "include_email_for_judge", "defender_sees_round1", "exclude_ambiguous", "shuffle", "seed",
        }
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("datasets", "providers", "matrix", "output_dir"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")

        datasets = [_dataset(d, base_dir) for d in data["datasets"]]
        names = [d.name for d in datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        if not datasets:
            raise ConfigError("config lists no datasets")

        providers = data["providers"]
        if not isinstance(providers, dict) or not providers:
            raise ConfigError("providers must be a non-empty object")
        for name, spec in providers.items():
            _check_provider(name, spec)

        matrix = []
        for i, entry in enumerate(data["matrix"]):
            try:
                options = PromptOptions(**entry.get("options", {}))
                m = MatrixEntry(
                    agent1=entry["agent1"],
                    agent2=entry["agent2"],
                    judge=entry["judge"],
                    options=options,
                    label=entry.get("label") or f"{entry['agent1']}-{entry['agent2']}-{entry['judge']}{options.suffix}",
                )
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"matrix entry {i}: {exc}") from None
            for role in ("agent1", "agent2", "judge"):
                if getattr(m, role) not in providers:
                    raise ConfigError(f"matrix entry {m.label!r}: unknown provider {getattr(m, role)!r}")
            matrix.append(m)
        if not matrix:
            raise ConfigError("matrix is empty")
        labels = [m.label for m in matrix]
        if len(set(labels)) != len(labels):
            raise ConfigError("matrix labels must be unique")

        try:
            unit = LengthUnit(data.get("length_unit", LengthUnit.WHITESPACE_TOKENS.value))
        except ValueError:
            raise ConfigError(f"unknown length_unit {data.get('length_unit')!r}") from None
        percentile = data.get("percentile", 75)
        if not isinstance(percentile, (int, float)) or not 0 < percentile <= 100:
            raise ConfigError("percentile must be in (0, 100]")
        parallelism = data.get("parallelism", 1)
        if not isinstance(parallelism, int) or parallelism < 1:
            raise ConfigError("parallelism must be an integer >= 1")

        output_dir = Path(data["output_dir"])
        if not output_dir.is_absolute():
            output_dir = base_dir / output_dir
        return cls(
            datasets=datasets,
            providers=providers,
            matrix=matrix,
            output_dir=output_dir,
            length_unit=unit,
            percentile=percentile,
            parallelism=parallelism,
            include_email_for_judge=bool(data.get("include_email_for_judge", False)),
            defender_sees_round1=bool(data.get("defender_sees_round1", True)),
            exclude_ambiguous=bool(data.get("exclude_ambiguous", False)),
            shuffle=bool(data.get("shuffle", False)),
            seed=int(data.get("seed", 0)),
            raw=data,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data, base_dir=path.parent)


def _dataset(d: dict[str, Any], base_dir: Path) -> DatasetSpec:
    try:
        name = d["name"]
        path = Path(d["path"])
    except (KeyError, TypeError):
        raise ConfigError(f"dataset entry needs name and path: {d!r}") from None
    preset = DATASET_PRESETS.get(name, {})
    field_map = d.get("field_map", preset.get("field_map"))
    aliases = d.get("label_aliases", preset.get("label_aliases"))
    if field_map is None or aliases is None:
        raise ConfigError(f"dataset {name!r}: field_map and label_aliases are required (no preset)")
    fmt = d.get("format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"dataset {name!r}: unsupported format {fmt!r}")
    for target in aliases.values():
        if target not in ("ham", "phishing"):
            raise ConfigError(f"dataset {name!r}: label alias target {target!r} is not ham/phishing")
    return DatasetSpec(
        name=name,
        path=path if path.is_absolute() else base_dir / path,
        format=fmt,
        field_map=dict(field_map),
        label_aliases=dict(aliases),
        delimiter=d.get("delimiter", ","),
    )


def _check_provider(name: str, spec: Any) -> None:
    if not isinstance(spec, dict):
        raise ConfigError(f"provider {name!r} must be an object")
    if "api_key" in spec:
        raise ConfigError(f"provider {name!r}: api keys belong in the environment (use api_key_env)")
    kind = spec.get("kind", "http")
    if kind == "http":
        try:
            ProviderConfig.from_dict(name, spec)
        except ProviderConfigError as exc:
            raise ConfigError(str(exc)) from None
    elif kind == "scripted":
        extra = set(spec) - {"kind", "default_reply", "script"}
        if extra:
            raise ConfigError(f"provider {name!r}: unknown scripted-provider fields {sorted(extra)}")
    else:
        raise ConfigError(f"provider {name!r}: unknown kind {kind!r}")
