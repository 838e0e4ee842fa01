"""Message records and JSON-lines ingestion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigError


@dataclass(frozen=True)
class RawMessage:
    id: str
    timestamp: datetime
    author: str
    text: str
    is_retweet: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("message id must be non-empty")
        if self.timestamp.tzinfo is None:
            object.__setattr__(
                self, "timestamp", self.timestamp.replace(tzinfo=timezone.utc)
            )
        else:
            object.__setattr__(
                self, "timestamp", self.timestamp.astimezone(timezone.utc)
            )


@dataclass
class TokenizedDoc:
    message_id: str
    tokens: list[str]
    token_ids: list[int] = field(default_factory=list)


def parse_message_line(line: str) -> RawMessage:
    """One ingestion record: id, created_at, user.screen_name, text, retweeted."""
    obj = json.loads(line)
    try:
        ts = datetime.fromisoformat(str(obj["created_at"]).replace("Z", "+00:00"))
        user = obj.get("user") or {}
        return RawMessage(
            id=str(obj["id"]),
            timestamp=ts,
            author=str(user.get("screen_name", obj.get("screen_name", ""))),
            text=str(obj["text"]),
            is_retweet=bool(obj.get("retweeted", False)),
        )
    except KeyError as exc:
        raise ConfigError(f"message record missing field {exc}") from exc


def read_messages(path: str | Path) -> list[RawMessage]:
    """Read a JSON-lines collection, enforcing id uniqueness."""
    msgs: list[RawMessage] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                msg = parse_message_line(line)
            except (json.JSONDecodeError, ValueError, ConfigError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad message record: {exc}") from exc
            if msg.id in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate message id {msg.id!r}")
            seen.add(msg.id)
            msgs.append(msg)
    return msgs


def write_messages(msgs: Iterable[RawMessage], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in msgs:
            fh.write(
                json.dumps(
                    {
                        "id": m.id,
                        "created_at": m.timestamp.isoformat().replace("+00:00", "Z"),
                        "user": {"screen_name": m.author},
                        "text": m.text,
                        "retweeted": m.is_retweet,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def iter_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
