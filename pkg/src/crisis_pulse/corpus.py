"""Filtered bag-of-words dictionary, TF-IDF weighting, and term statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, EmptyCorpus
from .messages import TokenizedDoc

DEFAULT_MIN_DOCS = 15
DEFAULT_MAX_FRAC = 0.5
DEFAULT_KEEP_N = 100_000

_DICT_MAGIC = "#crisis-pulse-dictionary"
_DICT_VERSION = 1


@dataclass(frozen=True)
class Dictionary:
    token_to_id: dict[str, int]
    doc_freq: dict[int, int]
    total_freq: dict[int, int]
    num_docs: int
    min_docs: int = DEFAULT_MIN_DOCS
    max_frac: float = DEFAULT_MAX_FRAC
    keep_n: int = DEFAULT_KEEP_N

    def __len__(self) -> int:
        return len(self.token_to_id)

    @property
    def id_to_token(self) -> dict[int, str]:
        return {i: t for t, i in self.token_to_id.items()}


@dataclass(frozen=True)
class BowVector:
    """Sparse document vector; ids strictly increasing, weights > 0."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        ids = [i for i, _ in self.entries]
        if ids != sorted(set(ids)):
            raise ValueError("BowVector ids must be strictly increasing")
        if any(w <= 0 for _, w in self.entries):
            raise ValueError("BowVector weights must be positive")

    def __len__(self) -> int:
        return len(self.entries)

    def total_weight(self) -> float:
        return sum(w for _, w in self.entries)


def build_dictionary(
    docs: Sequence[TokenizedDoc],
    min_docs: int = DEFAULT_MIN_DOCS,
    max_frac: float = DEFAULT_MAX_FRAC,
    keep_n: int = DEFAULT_KEEP_N,
) -> Dictionary:
    """Count token frequencies, apply both document-frequency thresholds,
    keep the keep_n most frequent survivors (ties lexicographic)."""
    if not docs:
        raise EmptyCorpus("cannot build a dictionary from an empty corpus")
    num_docs = len(docs)
    doc_freq: Counter[str] = Counter()
    total_freq: Counter[str] = Counter()
    for doc in docs:
        total_freq.update(doc.tokens)
        doc_freq.update(set(doc.tokens))
    kept = [
        tok
        for tok, df in doc_freq.items()
        if df >= min_docs and df / num_docs <= max_frac
    ]
    kept.sort(key=lambda tok: (-total_freq[tok], tok))
    kept = kept[:keep_n]
    kept.sort()  # dense ids in lexicographic token order
    token_to_id = {tok: i for i, tok in enumerate(kept)}
    return Dictionary(
        token_to_id=token_to_id,
        doc_freq={i: doc_freq[tok] for tok, i in token_to_id.items()},
        total_freq={i: total_freq[tok] for tok, i in token_to_id.items()},
        num_docs=num_docs,
        min_docs=min_docs,
        max_frac=max_frac,
        keep_n=keep_n,
    )


def attach_ids(doc: TokenizedDoc, dictionary: Dictionary) -> TokenizedDoc:
    """Fill token_ids with the dictionary ids of in-vocabulary tokens."""
    doc.token_ids = [
        dictionary.token_to_id[t] for t in doc.tokens if t in dictionary.token_to_id
    ]
    return doc


def to_bow(doc: TokenizedDoc, dictionary: Dictionary) -> BowVector:
    counts: Counter[int] = Counter(
        dictionary.token_to_id[t] for t in doc.tokens if t in dictionary.token_to_id
    )
    return BowVector(tuple((i, float(c)) for i, c in sorted(counts.items())))


def tfidf_corpus(bows: Sequence[BowVector], dictionary: Dictionary) -> list[BowVector]:
    """weight = count * log2(D / df), each document L2-normalized."""
    num_docs = dictionary.num_docs
    idf = {
        i: math.log2(num_docs / df) for i, df in dictionary.doc_freq.items() if df > 0
    }
    out: list[BowVector] = []
    for bow in bows:
        weighted = [(i, c * idf.get(i, 0.0)) for i, c in bow.entries]
        weighted = [(i, w) for i, w in weighted if w > 0]
        norm = math.sqrt(sum(w * w for _, w in weighted))
        if norm == 0:
            out.append(BowVector(()))
        else:
            out.append(BowVector(tuple((i, w / norm) for i, w in weighted)))
    return out


def term_frequencies(
    docs: Iterable[TokenizedDoc], top_n: int
) -> list[tuple[str, int]]:
    counts: Counter[str] = Counter()
    for doc in docs:
        counts.update(doc.tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]


def key_bigrams(
    docs: Iterable[TokenizedDoc], min_count: int, top_n: int
) -> list[tuple[str, int]]:
    """Adjacent token pairs occurring at least min_count times."""
    counts: Counter[str] = Counter()
    for doc in docs:
        for a, b in zip(doc.tokens, doc.tokens[1:]):
            counts[f"{a} {b}"] += 1
    ranked = sorted(
        ((bg, c) for bg, c in counts.items() if c >= min_count),
        key=lambda kv: (-kv[1], kv[0]),
    )
    return ranked[:top_n]


def save_dictionary(dictionary: Dictionary, path: str | Path) -> None:
    """Tab-separated: id, token, doc_freq, total_freq, with a parameter header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"{_DICT_MAGIC}\tv{_DICT_VERSION}\tD={dictionary.num_docs}"
            f"\tmin_docs={dictionary.min_docs}\tmax_frac={dictionary.max_frac!r}"
            f"\tkeep_n={dictionary.keep_n}\n"
        )
        for tok, i in sorted(dictionary.token_to_id.items(), key=lambda kv: kv[1]):
            fh.write(f"{i}\t{tok}\t{dictionary.doc_freq[i]}\t{dictionary.total_freq[i]}\n")


def load_dictionary(path: str | Path) -> Dictionary:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if not header or header[0] != _DICT_MAGIC:
            raise ConfigError(f"{path}: not a dictionary file")
        params = dict(p.split("=", 1) for p in header[2:])
        token_to_id: dict[str, int] = {}
        doc_freq: dict[int, int] = {}
        total_freq: dict[int, int] = {}
        for line in fh:
            i, tok, df, tf = line.rstrip("\n").split("\t")
            token_to_id[tok] = int(i)
            doc_freq[int(i)] = int(df)
            total_freq[int(i)] = int(tf)
    return Dictionary(
        token_to_id=token_to_id,
        doc_freq=doc_freq,
        total_freq=total_freq,
        num_docs=int(params["D"]),
        min_docs=int(params["min_docs"]),
        max_frac=float(params["max_frac"]),
        keep_n=int(params["keep_n"]),
    )
