"""Scoring backends.

Every backend maps text to a probability distribution over a task's fixed
label set.  Distributions are renormalized at the edge so responses always
sum to 1 within 1e-6 regardless of backend arithmetic.
"""

from __future__ import annotations

import hashlib
import math


class HashBackend:
    """Deterministic stand-in scorer: scores derive from a digest of the
    input text, so identical text always gets identical scores.  No claim
    of semantic quality — it exists so the service and its contract can be
    exercised without model weights."""

    def __init__(self, task: str, labels: tuple[str, ...]):
        self.task = task
        self.labels = labels

    def score(self, text: str) -> dict[str, float]:
        logits = []
        for label in self.labels:
            digest = hashlib.sha256(f"{self.task}\x00{label}\x00{text}".encode()).digest()
            logits.append(int.from_bytes(digest[:8], "big") / 2**64 * 4.0)
        peak = max(logits)
        exps = [math.exp(v - peak) for v in logits]
        total = sum(exps)
        return {label: e / total for label, e in zip(self.labels, exps)}


class TransformersBackend:
    """Wraps a transformers sequence-classification checkpoint.

    The checkpoint's own labels are matched to the task's fixed label set
    case-insensitively; any fixed label the checkpoint does not emit gets
    the leftover mass split evenly.  Loading is eager and fail-fast.
    """

    def __init__(self, task: str, labels: tuple[str, ...], checkpoint: str):
        from transformers import pipeline  # deferred: heavy optional dep

        self.task = task
        self.labels = labels
        self._pipe = pipeline(
            "text-classification", model=checkpoint, top_k=None, truncation=True
        )

    def score(self, text: str) -> dict[str, float]:
        raw = self._pipe(text)[0]
        by_label = {entry["label"].lower(): float(entry["score"]) for entry in raw}
        scores = {label: by_label.get(label.lower(), 0.0) for label in self.labels}
        leftover = max(0.0, 1.0 - sum(scores.values()))
        missing = [label for label in self.labels if scores[label] == 0.0]
        for label in missing:
            scores[label] = leftover / len(missing)
        total = sum(scores.values())
        if total <= 0.0:
            return {label: 1.0 / len(self.labels) for label in self.labels}
        return {label: v / total for label, v in scores.items()}


def load_backend(task: str, labels: tuple[str, ...], model_id: str):
    if model_id == "builtin":
        return HashBackend(task, labels)
    if model_id.startswith("hf:"):
        return TransformersBackend(task, labels, model_id[3:])
    raise ValueError(f"unknown model identifier {model_id!r} for task {task!r}")
