"""Pipeline configuration: one JSON object mirroring the stage options.

Resolution order everywhere is CLI flag > config file > built-in
default.  Unknown keys are rejected loudly — a typo silently falling
back to a default is the worst failure mode a config file can have.
"""

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigurationError


@dataclass
class CorpusOptions:
    min_count: int = 5
    wordlist: str | None = None


@dataclass
class GraphOptions:
    weight_mode: str = "tfidf"  # "tf" or "tfidf"
    window: int = 200

    def validate(self) -> "GraphOptions":
        if self.weight_mode not in ("tf", "tfidf"):
            raise ConfigurationError(
                f"weight_mode must be 'tf' or 'tfidf', got {self.weight_mode!r}"
            )
        if self.window < 1:
            raise ConfigurationError(f"tf-idf window must be >= 1, got {self.window}")
        return self


@dataclass
class WalkOptions:
    p: float = 1.0
    q: float = 0.001
    walk_length: int = 200
    total_walks: int | None = None
    walks_per_node: int | None = None
    min_walks_per_node: int = 1
    format: str = "text"  # "text" or "binary"

    def validate(self) -> "WalkOptions":
        if self.format not in ("text", "binary"):
            raise ConfigurationError(f"walk format must be 'text' or 'binary', got {self.format!r}")
        if self.total_walks is not None and self.walks_per_node is not None:
            raise ConfigurationError("give either total_walks or walks_per_node, not both")
        if self.walks_per_node is not None and self.walks_per_node < 0:
            raise ConfigurationError(f"walks_per_node must be >= 0, got {self.walks_per_node}")
        return self


@dataclass
class TrainOptions:
    dimension: int = 100
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    noise_exponent: float = 0.75
    deterministic: bool = False
    subsample: float = 0.0


@dataclass
class EvalTask:
    task: str  # "similarity" | "analogy" | "categorization"
    dataset: str  # path

    def validate(self) -> "EvalTask":
        if self.task not in ("similarity", "analogy", "categorization"):
            raise ConfigurationError(f"unknown eval task {self.task!r}")
        return self


@dataclass
class PipelineConfig:
    corpus_paths: list = field(default_factory=list)
    out_dir: str = "."
    seed: int = 1
    threads: int | None = None
    corpus: CorpusOptions = field(default_factory=CorpusOptions)
    graph: GraphOptions = field(default_factory=GraphOptions)
    walk: WalkOptions = field(default_factory=WalkOptions)
    train: TrainOptions = field(default_factory=TrainOptions)
    eval: list = field(default_factory=list)  # list of EvalTask

    def validate(self) -> "PipelineConfig":
        self.graph.validate()
        self.walk.validate()
        for task in self.eval:
            task.validate()
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in 64 unsigned bits")
        if self.threads is not None and self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {self.threads}")
        return self


_NESTED = {
    "corpus": CorpusOptions,
    "graph": GraphOptions,
    "walk": WalkOptions,
    "train": TrainOptions,
}


def _dataclass_from_dict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where}: expected an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigurationError(f"{where}: unknown key(s): {', '.join(unknown)}")
    return cls(**data)


def config_from_dict(data: dict, where: str = "config") -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where}: top level must be a JSON object")
    names = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigurationError(f"{where}: unknown key(s): {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED:
            kwargs[key] = _dataclass_from_dict(_NESTED[key], value, f"{where}.{key}")
        elif key == "eval":
            if not isinstance(value, list):
                raise ConfigurationError(f"{where}.eval: expected a list of tasks")
            kwargs[key] = [
                _dataclass_from_dict(EvalTask, item, f"{where}.eval[{i}]")
                for i, item in enumerate(value)
            ]
        else:
            kwargs[key] = value
    return PipelineConfig(**kwargs).validate()


def config_to_dict(config: PipelineConfig) -> dict:
    return dataclasses.asdict(config)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data, where=str(path))


def save_config(config: PipelineConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
