"""JSONL record schemas and streaming readers/writers.

One compact JSON object per line, UTF-8, LF endings, canonical field order.
Floats are serialized with full repr precision so weight arrays round-trip
exactly and repeated runs are byte identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Protocol, Type, TypeVar

from .align import AlignOp, WordAlignment
from .biasing import BiasingList
from .errors import ManifestParseError, ManifestSchemaError


class Record(Protocol):
    def to_dict(self) -> dict[str, Any]: ...

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Record": ...


R = TypeVar("R", bound="Record")


def _require(data: dict[str, Any], key: str, kind: type | tuple[type, ...]):
    if key not in data:
        raise KeyError(f"missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise TypeError(f"field {key!r} has type {type(value).__name__}")
    return value


@dataclass
class UtteranceRecord:
    id: str
    text: str
    audio_path: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id, "text": self.text}
        if self.audio_path is not None:
            out["audio_path"] = self.audio_path
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "UtteranceRecord":
        return cls(
            id=_require(data, "id", str),
            text=_require(data, "text", str),
            audio_path=data.get("audio_path"),
        )


@dataclass
class AlignmentRecord:
    id: str
    ops: list[AlignOp]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "ops": [[op.kind, op.ref_word, op.hyp_word] for op in self.ops],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AlignmentRecord":
        raw_ops = _require(data, "ops", list)
        ops = []
        for entry in raw_ops:
            if not isinstance(entry, list) or len(entry) != 3:
                raise TypeError("each op must be [kind, ref_word, hyp_word]")
            ops.append(AlignOp(kind=entry[0], ref_word=entry[1], hyp_word=entry[2]))
        return cls(id=_require(data, "id", str), ops=ops)

    def alignment(self) -> WordAlignment:
        return WordAlignment(ops=list(self.ops))


@dataclass
class BiasingListRecord:
    id: str
    words: list[str]
    true_bias: list[str]

    @classmethod
    def from_biasing_list(cls, blist: BiasingList) -> "BiasingListRecord":
        return cls(id=blist.utterance_id, words=list(blist.words), true_bias=sorted(blist.true_bias))

    def to_biasing_list(self) -> BiasingList:
        return BiasingList(utterance_id=self.id, words=list(self.words), true_bias=set(self.true_bias))

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "words": self.words, "true_bias": self.true_bias}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BiasingListRecord":
        return cls(
            id=_require(data, "id", str),
            words=[str(w) for w in _require(data, "words", list)],
            true_bias=[str(w) for w in _require(data, "true_bias", list)],
        )


@dataclass
class TrainManifestRecord:
    id: str
    prompt: str
    target_text: str
    target_tokens: list[int]
    weights: list[float]
    true_bias_words: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.target_tokens):
            raise ManifestSchemaError(
                f"{self.id}: {len(self.weights)} weights for "
                f"{len(self.target_tokens)} target tokens"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "prompt": self.prompt,
            "target_text": self.target_text,
            "target_tokens": self.target_tokens,
            "weights": self.weights,
            "true_bias_words": self.true_bias_words,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainManifestRecord":
        return cls(
            id=_require(data, "id", str),
            prompt=_require(data, "prompt", str),
            target_text=_require(data, "target_text", str),
            target_tokens=[int(t) for t in _require(data, "target_tokens", list)],
            weights=[float(w) for w in _require(data, "weights", list)],
            true_bias_words=[str(w) for w in _require(data, "true_bias_words", list)],
        )


def read_jsonl(path: str | Path, schema: Type[R]) -> Iterator[R]:
    """Stream records from a JSONL file.

    Malformed JSON raises ManifestParseError and schema violations raise
    ManifestSchemaError, both naming the line number; OS-level errors
    (missing file, permissions) propagate as OSError.
    """
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ManifestSchemaError(f"{path}:{lineno}: expected a JSON object")
            try:
                yield schema.from_dict(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestSchemaError(f"{path}:{lineno}: {exc}") from exc


def write_jsonl(path: str | Path, records: Iterable[Record]) -> None:
    """Write records, one compact JSON object per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record.to_dict(), ensure_ascii=False, separators=(",", ":")))
            f.write("\n")


def write_json(path: str | Path, data: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")


def read_json(path: str | Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
