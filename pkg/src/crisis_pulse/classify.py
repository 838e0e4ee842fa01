"""Message filtering: lexicon baselines, behavioral indicators, disaster
phases, known-account flagging, and the remote classifier wire client."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import requests

from .errors import LexiconMissing, ProtocolError, RemoteUnavailable
from .messages import RawMessage, TokenizedDoc
from .stemmer import stem
from .textnorm import load_wordlist

DEFAULT_BINARY_THRESHOLD = 0.05
DEFAULT_REMOTE_TIMEOUT = 10.0

LABEL_SETS: dict[str, tuple[str, ...]] = {
    "sentiment": ("negative", "neutral", "positive"),
    "emotion": ("angry", "excited", "bored", "fear", "happy", "sad"),
    "intent": ("feedback", "marketing", "news", "query", "spam"),
    "abuse": ("abusive", "hate_speech", "neither"),
    "sarcasm": ("non_sarcastic", "sarcastic"),
    "phase": (
        "prevention_awareness",
        "mitigation",
        "preparedness",
        "response",
        "recovery_needs",
        "recovery_essentials",
    ),
}
BINARY_LABELS: tuple[str, ...] = ("no", "yes")
BEHAVIORAL_INDICATORS = ("sentiment", "emotion", "intent", "abuse", "sarcasm")
BINARY_CATEGORIES = ("disaster", "humanitarian", "medical")
FILTER_CATEGORIES = ("disaster", "disaster_medical", "disaster_humanitarian", "positive")


def label_set(indicator: str) -> tuple[str, ...]:
    if indicator.startswith("binary:"):
        return BINARY_LABELS
    try:
        return LABEL_SETS[indicator]
    except KeyError:
        raise ProtocolError(f"unknown indicator {indicator!r}") from None


@dataclass(frozen=True)
class ClassScores:
    indicator: str
    scores: dict[str, float]
    dominant: str


@dataclass
class FilteredSet:
    category: str
    message_ids: list[str]
    source: str  # baseline | remote | known_account


def _softened(indicator: str, hits: Mapping[str, float]) -> ClassScores:
    """Add-one smoothing over the indicator's label set, argmax dominant
    (lowest lexicographic label on ties)."""
    labels = label_set(indicator)
    raw = {lab: hits.get(lab, 0.0) + 1.0 for lab in labels}
    total = sum(raw.values())
    scores = {lab: v / total for lab, v in raw.items()}
    dominant = min(labels, key=lambda lab: (-scores[lab], lab))
    return ClassScores(indicator=indicator, scores=scores, dominant=dominant)


class LexiconSet:
    """Label -> stemmed word set, for one indicator."""

    def __init__(self, indicator: str, words: Mapping[str, Iterable[str]]):
        self.indicator = indicator
        self.words: dict[str, frozenset[str]] = {
            lab: frozenset(stem(w.lower()) for w in ws) for lab, ws in words.items()
        }

    def hits(self, doc: TokenizedDoc) -> dict[str, float]:
        return {
            lab: float(sum(1 for t in doc.tokens if t in ws))
            for lab, ws in self.words.items()
        }


def _data_dir() -> Path:
    return Path(str(resources.files("crisis_pulse").joinpath("data", "lexicons")))


def load_lexicon_set(indicator: str, directory: str | Path | None = None) -> LexiconSet:
    """Read <indicator>_<label>.txt files; every label of the set must exist."""
    directory = Path(directory) if directory is not None else _data_dir()
    words: dict[str, frozenset[str]] = {}
    for lab in label_set(indicator):
        path = directory / f"{indicator}_{lab}.txt"
        if not path.exists():
            raise LexiconMissing(f"lexicon file not found: {path}")
        words[lab] = load_wordlist(path)
    return LexiconSet(indicator, words)


def load_category_lexicon(category: str, directory: str | Path | None = None) -> frozenset[str]:
    directory = Path(directory) if directory is not None else _data_dir()
    path = directory / f"category_{category}.txt"
    if not path.exists():
        raise LexiconMissing(f"lexicon file not found: {path}")
    return frozenset(stem(w) for w in load_wordlist(path))


@lru_cache(maxsize=None)
def _default_lexicon(indicator: str) -> LexiconSet:
    return load_lexicon_set(indicator)


def classify_sentiment(doc: TokenizedDoc, lexicon: LexiconSet | None = None) -> ClassScores:
    """Signed word-list sentiment: positive iff strictly more positive hits,
    negative iff strictly more negative hits, neutral otherwise (incl. ties)."""
    if lexicon is None:
        lexicon = _default_lexicon("sentiment")
    hits = lexicon.hits(doc)
    p = hits.get("positive", 0.0)
    n = hits.get("negative", 0.0)
    raw = {"positive": p + 1.0, "negative": n + 1.0, "neutral": 1.0}
    total = sum(raw.values())
    scores = {lab: v / total for lab, v in raw.items()}
    if p > n:
        dominant = "positive"
    elif n > p:
        dominant = "negative"
    else:
        dominant = "neutral"
    return ClassScores(indicator="sentiment", scores=scores, dominant=dominant)


def classify_binary(
    doc: TokenizedDoc,
    category: str,
    lexicon: frozenset[str] | None = None,
    threshold: float = DEFAULT_BINARY_THRESHOLD,
) -> tuple[bool, float]:
    """score = fraction of tokens in the category word list; member iff >= threshold."""
    if category not in BINARY_CATEGORIES:
        raise ValueError(f"unknown binary category {category!r}")
    if lexicon is None:
        lexicon = load_category_lexicon(category)
    if not doc.tokens:
        return False, 0.0
    score = sum(1 for t in doc.tokens if t in lexicon) / len(doc.tokens)
    return score >= threshold, score


def behavioral_profile(
    doc: TokenizedDoc,
    lexicons: Mapping[str, LexiconSet] | None = None,
) -> dict[str, ClassScores]:
    """Softened-count scores for all five behavioral indicators."""
    out: dict[str, ClassScores] = {}
    for indicator in BEHAVIORAL_INDICATORS:
        if lexicons is not None:
            try:
                lexicon = lexicons[indicator]
            except KeyError:
                raise LexiconMissing(f"no lexicon for indicator {indicator!r}") from None
        else:
            lexicon = _default_lexicon(indicator)
        out[indicator] = _softened(indicator, lexicon.hits(doc))
    return out


def phase_categorize(
    doc: TokenizedDoc, phase_lexicons: LexiconSet | None = None
) -> ClassScores:
    if phase_lexicons is None:
        phase_lexicons = _default_lexicon("phase")
    return _softened("phase", phase_lexicons.hits(doc))


def flag_known_accounts(
    msgs: Sequence[RawMessage], accounts: Iterable[str]
) -> FilteredSet:
    """Case-insensitive exact handle match against the stakeholder list."""
    table = {a.lower() for a in accounts}
    ids = [m.id for m in msgs if m.author.lower() in table]
    return FilteredSet(category="known_account", message_ids=ids, source="known_account")


def remote_classify(
    text: str,
    tasks: Sequence[str],
    endpoint: str,
    timeout: float = DEFAULT_REMOTE_TIMEOUT,
    session: requests.Session | None = None,
) -> dict[str, ClassScores]:
    """POST /classify per the wire contract; closed label sets enforced."""
    if not tasks:
        raise ValueError("tasks must be non-empty")
    url = endpoint.rstrip("/") + "/classify"
    post = session.post if session is not None else requests.post
    try:
        resp = post(url, json={"text": text, "tasks": list(tasks)}, timeout=timeout)
    except requests.RequestException as exc:
        raise RemoteUnavailable(f"classifier endpoint unreachable: {exc}") from exc
    if 400 <= resp.status_code < 500:
        raise ProtocolError(f"classifier rejected request: HTTP {resp.status_code}")
    if resp.status_code != 200:
        raise RemoteUnavailable(f"classifier returned HTTP {resp.status_code}")
    try:
        body = resp.json()
    except ValueError as exc:
        raise ProtocolError(f"non-JSON classifier response: {exc}") from exc
    return parse_classify_response(body, tasks)


def parse_classify_response(
    body: object, tasks: Sequence[str]
) -> dict[str, ClassScores]:
    if not isinstance(body, dict) or not isinstance(body.get("results"), dict):
        raise ProtocolError("response must be an object with a 'results' object")
    results = body["results"]
    out: dict[str, ClassScores] = {}
    for task in tasks:
        entry = results.get(task)
        if not isinstance(entry, dict):
            raise ProtocolError(f"missing result for task {task!r}")
        scores = entry.get("scores")
        dominant = entry.get("dominant")
        labels = label_set(task)
        if not isinstance(scores, dict) or set(scores) != set(labels):
            raise ProtocolError(f"task {task!r}: scores must cover exactly {labels}")
        parsed: dict[str, float] = {}
        for lab, val in scores.items():
            if not isinstance(val, (int, float)) or not 0 <= val <= 1:
                raise ProtocolError(f"task {task!r}: score for {lab!r} out of [0,1]")
            parsed[lab] = float(val)
        if abs(sum(parsed.values()) - 1.0) > 1e-6:
            raise ProtocolError(f"task {task!r}: scores do not sum to 1")
        if dominant not in labels:
            raise ProtocolError(f"task {task!r}: unknown dominant label {dominant!r}")
        out[task] = ClassScores(indicator=task, scores=parsed, dominant=dominant)
    return out


@dataclass
class BaselineClassifier:
    """Pure lexicon classifier bundle used by the filtering stage."""

    sentiment: LexiconSet | None = None
    categories: dict[str, frozenset[str]] = field(default_factory=dict)
    threshold: float = DEFAULT_BINARY_THRESHOLD

    def _category(self, name: str) -> frozenset[str]:
        if name not in self.categories:
            self.categories[name] = load_category_lexicon(name)
        return self.categories[name]

    def classify(self, doc: TokenizedDoc) -> dict[str, bool]:
        is_dis, _ = classify_binary(doc, "disaster", self._category("disaster"), self.threshold)
        is_med, _ = classify_binary(doc, "medical", self._category("medical"), self.threshold)
        is_hum, _ = classify_binary(
            doc, "humanitarian", self._category("humanitarian"), self.threshold
        )
        positive = classify_sentiment(doc, self.sentiment).dominant == "positive"
        return {
            "disaster": is_dis,
            "medical": is_med,
            "humanitarian": is_hum,
            "positive": positive,
        }


@dataclass
class RemoteClassifier:
    """Wire-contract classifier; optional baseline fallback must be explicit."""

    endpoint: str
    fallback: BaselineClassifier | None = None
    timeout: float = DEFAULT_REMOTE_TIMEOUT

    def __post_init__(self) -> None:
        self._session = requests.Session()

    def classify(self, doc: TokenizedDoc) -> dict[str, bool]:
        text = " ".join(doc.tokens)
        tasks = ["sentiment", "binary:disaster", "binary:medical", "binary:humanitarian"]
        try:
            results = remote_classify(text, tasks, self.endpoint, self.timeout, self._session)
        except RemoteUnavailable:
            if self.fallback is None:
                raise
            return self.fallback.classify(doc)
        return {
            "disaster": results["binary:disaster"].dominant == "yes",
            "medical": results["binary:medical"].dominant == "yes",
            "humanitarian": results["binary:humanitarian"].dominant == "yes",
            "positive": results["sentiment"].dominant == "positive",
        }


def filter_pipeline(
    docs: Sequence[TokenizedDoc],
    classifier: BaselineClassifier | RemoteClassifier | None = None,
) -> dict[str, FilteredSet]:
    """Four filtered sets in ingestion order; medical/humanitarian are
    evaluated only within the disaster set (subset law)."""
    if classifier is None:
        classifier = BaselineClassifier()
    source = "remote" if isinstance(classifier, RemoteClassifier) else "baseline"
    sets: dict[str, list[str]] = {cat: [] for cat in FILTER_CATEGORIES}
    for doc in docs:
        verdict = classifier.classify(doc)
        if verdict["disaster"]:
            sets["disaster"].append(doc.message_id)
            if verdict["medical"]:
                sets["disaster_medical"].append(doc.message_id)
            if verdict["humanitarian"]:
                sets["disaster_humanitarian"].append(doc.message_id)
        if verdict["positive"]:
            sets["positive"].append(doc.message_id)
    return {
        cat: FilteredSet(category=cat, message_ids=ids, source=source)
        for cat, ids in sets.items()
    }


def positive_percentage(positive: int, total: int, decimals: int = 1) -> float:
    """Share of positive messages in a filtered set, as a rounded percentage."""
    if total <= 0:
        raise ValueError("total must be positive")
    return round(100.0 * positive / total, decimals)
