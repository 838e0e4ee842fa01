"""Service configuration."""

from dataclasses import dataclass, field

from .labels import LABEL_SETS

DEFAULT_MODELS = {
    "sentiment": "builtin",
    "binary:disaster": "builtin",
    "binary:humanitarian": "builtin",
    "binary:medical": "builtin",
}


@dataclass
class SidecarConfig:
    """Listen address, per-task model identifiers, and request limits.

    Model identifiers are either ``builtin`` (deterministic hash-based
    scorer, no external weights) or ``hf:<checkpoint>`` (a transformers
    sequence-classification checkpoint whose labels are mapped onto the
    task's fixed label set).
    """

    host: str = "127.0.0.1"
    port: int = 8081
    models: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MODELS))
    max_request_chars: int = 10_000
    timeout_s: float = 30.0

    def __post_init__(self) -> None:
        for task in self.models:
            if task not in LABEL_SETS:
                raise ValueError(f"unknown task {task!r}")
        if not self.models:
            raise ValueError("at least one task must be configured")
        if self.max_request_chars <= 0:
            raise ValueError("max_request_chars must be positive")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
