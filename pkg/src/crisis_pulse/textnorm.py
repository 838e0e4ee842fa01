"""Raw text normalization and tokenization for social-media messages.

Cleanup stages, applied in order:
  R1 decode HTML entities, strip markup tags
  R2 remove URLs (scheme-prefixed and bare t.co links)
  R3 remove @mentions and #hashtags as whole tokens
  R4 remove emoji codepoints and ASCII smileys (table shipped as data)
  R5 remove reserved tokens RT / FAV
  R6 lowercase, replace non-alphanumerics with spaces, collapse whitespace
"""

from __future__ import annotations

import html
import re
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .messages import RawMessage, TokenizedDoc
from .stemmer import stem

_TAG_RE = re.compile(r"<[^>\s][^>]*>")
_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+|\bt\.co/\S+)", re.IGNORECASE)
_MENTION_HASHTAG_RE = re.compile(r"[@#]\w+")
_RESERVED_RE = re.compile(r"\b(?:rt|fav)\b", re.IGNORECASE)
_EMOJI_RE = re.compile(
    "["
    "\U0001F000-\U0001FAFF"  # pictographs, emoticons, transport, supplemental
    "☀-➿"          # misc symbols, dingbats
    "\U0001F1E6-\U0001F1FF"  # regional indicators
    "︎️‍"     # variation selectors, ZWJ
    "⬀-⯿"
    "]+"
)
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")

DEFAULT_MIN_TOKEN_LEN = 3


def _data_path(name: str) -> Path:
    return Path(str(resources.files("crisis_pulse").joinpath("data", name)))


def load_wordlist(path: str | Path) -> frozenset[str]:
    """One entry per line; blank lines and '#' comment lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    return load_wordlist(_data_path("stopwords.txt"))


@lru_cache(maxsize=1)
def _smiley_table() -> frozenset[str]:
    # '#' is meaningful in smileys, so no comment stripping here
    with open(_data_path("smileys.txt"), encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def normalize(text: str) -> str:
    """Reduce raw message text to lowercase alphanumeric words.

    Idempotent; output matches [a-z0-9]+( [a-z0-9]+)* or is empty.
    """
    out = _TAG_RE.sub(" ", text)
    out = html.unescape(out)  # decoded entity chars fall through to R6, not tag stripping
    out = _URL_RE.sub(" ", out)
    out = _MENTION_HASHTAG_RE.sub(" ", out)
    smileys = _smiley_table()
    out = " ".join(tok for tok in out.split() if tok not in smileys)
    out = _EMOJI_RE.sub(" ", out)
    out = _RESERVED_RE.sub(" ", out)
    out = _NON_ALNUM_RE.sub(" ", out.lower())
    return " ".join(out.split())


def tokenize(
    clean: str,
    stopwords: frozenset[str] | set[str],
    min_len: int = DEFAULT_MIN_TOKEN_LEN,
) -> list[str]:
    """Whitespace split, then drop short tokens and stopwords."""
    return [t for t in clean.split() if len(t) >= min_len and t not in stopwords]


def preprocess_document(
    msg: RawMessage,
    stopwords: frozenset[str] | set[str] | None = None,
    min_len: int = DEFAULT_MIN_TOKEN_LEN,
) -> TokenizedDoc:
    """normalize -> tokenize -> stem; token_ids stay empty until a dictionary is attached."""
    if stopwords is None:
        stopwords = default_stopwords()
    tokens = [stem(t) for t in tokenize(normalize(msg.text), stopwords, min_len)]
    return TokenizedDoc(message_id=msg.id, tokens=tokens)
