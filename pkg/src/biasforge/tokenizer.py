"""Byte-pair tokenizer loaded from a ranks file.

The ranks file is one entry per line, `<base64 bytes><space><integer rank>`,
UTF-8, LF endings; special tokens live in a sidecar JSON file mapping token
string to id. Encoding is greedy lowest-rank merging over UTF-8 bytes,
applied per chunk of a GPT-style pre-split (a word keeps its single leading
space), which is what makes per-word token spans consistent with encoding
the whole rendered transcript.
"""
from __future__ import annotations

import base64
import binascii
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import TokenizerError
from .textnorm import NormalizedText

# A chunk is either a word with an optional single leading space, or a run
# of whitespace. Chunks concatenate back to the original string.
_CHUNK_RE = re.compile(r" ?\S+|\s+")

# Prompt budgets. The baseline decoder accepts 224 prompt tokens; the
# extended-position variant has 756 positions total, of which a configurable
# reserve is kept for the target transcript.
BASELINE_PROMPT_BUDGET = 224
EXTENDED_POSITIONS = 756
DEFAULT_TARGET_RESERVE = 256


def extended_prompt_budget(reserve: int = DEFAULT_TARGET_RESERVE) -> int:
    """Prompt budget when positions are extended to 756 tokens."""
    if not 0 <= reserve < EXTENDED_POSITIONS:
        raise ValueError(f"reserve must be in [0, {EXTENDED_POSITIONS})")
    return EXTENDED_POSITIONS - reserve


@dataclass(frozen=True)
class TokenSpan:
    """Half-open token range [start, end) covering one word."""

    word_index: int
    start: int
    end: int


@dataclass
class Tokenizer:
    ranks: dict[bytes, int]
    specials: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._decoder: dict[int, bytes] = {r: b for b, r in self.ranks.items()}
        self._special_decoder: dict[int, str] = {i: s for s, i in self.specials.items()}
        self._chunk_cache: dict[bytes, tuple[int, ...]] = {}

    @property
    def vocab_size(self) -> int:
        return len(self.ranks) + len(self.specials)

    def encode(self, text: str) -> list[int]:
        """Greedy lowest-rank BPE over the UTF-8 bytes of each chunk."""
        ids: list[int] = []
        for match in _CHUNK_RE.finditer(text):
            ids.extend(self._encode_chunk(match.group().encode("utf-8")))
        return ids

    def decode(self, ids: list[int]) -> str:
        """Inverse of encode; special-token ids decode to their strings."""
        pieces: list[bytes] = []
        for i in ids:
            piece = self._decoder.get(i)
            if piece is None:
                special = self._special_decoder.get(i)
                if special is None:
                    raise TokenizerError(f"unknown token id {i}")
                piece = special.encode("utf-8")
            pieces.append(piece)
        return b"".join(pieces).decode("utf-8", errors="replace")

    def _encode_chunk(self, chunk: bytes) -> tuple[int, ...]:
        cached = self._chunk_cache.get(chunk)
        if cached is not None:
            return cached
        parts = [chunk[i : i + 1] for i in range(len(chunk))]
        while len(parts) > 1:
            best_rank = None
            best_i = -1
            for i in range(len(parts) - 1):
                rank = self.ranks.get(parts[i] + parts[i + 1])
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_i = rank, i
            if best_rank is None:
                break
            parts[best_i : best_i + 2] = [parts[best_i] + parts[best_i + 1]]
        ids = tuple(self.ranks[p] for p in parts)
        if len(self._chunk_cache) < 1_000_000:
            self._chunk_cache[chunk] = ids
        return ids

    def word_token_spans(self, words: NormalizedText) -> list[TokenSpan]:
        """Token span per word under the leading-space-per-word rendering.

        Flattening the per-span ids reproduces encode(" " + rendered), so
        span arithmetic is position independent.
        """
        spans: list[TokenSpan] = []
        pos = 0
        for idx, word in enumerate(words.words):
            n = len(self._encode_chunk((" " + word).encode("utf-8")))
            spans.append(TokenSpan(word_index=idx, start=pos, end=pos + n))
            pos += n
        return spans

    def encode_words(self, words: NormalizedText) -> list[int]:
        """Token ids of the leading-space-per-word rendering."""
        ids: list[int] = []
        for word in words.words:
            ids.extend(self._encode_chunk((" " + word).encode("utf-8")))
        return ids

    def truncate_prompt(self, prompt: str, budget: int) -> str:
        """Drop whole trailing words until the prompt fits the token budget."""
        if budget <= 0:
            raise ValueError("budget must be positive")
        words = prompt.split()
        if not words:
            return ""
        total = 0
        kept = 0
        for i, word in enumerate(words):
            rendered = word if i == 0 else " " + word
            total += len(self._encode_chunk(rendered.encode("utf-8")))
            if total > budget:
                break
            kept = i + 1
        return " ".join(words[:kept])


def load_tokenizer(vocab_file: str | Path, specials_file: str | Path | None = None) -> Tokenizer:
    """Load a tokenizer from a ranks file plus optional specials sidecar.

    When `specials_file` is omitted, `<vocab_file>.specials.json` is used if
    present. Raises TokenizerError naming the offending line for malformed
    entries, duplicate ranks, duplicate byte sequences, or missing
    single-byte coverage (which would make encoding partial).
    """
    vocab_file = Path(vocab_file)
    ranks: dict[bytes, int] = {}
    seen_ranks: set[int] = set()
    with open(vocab_file, "rb") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip(b"\n")
            if not line:
                continue
            fields = line.split(b" ")
            if len(fields) != 2:
                raise TokenizerError(
                    f"{vocab_file}:{lineno}: expected '<base64> <rank>', got {line!r}"
                )
            try:
                token = base64.b64decode(fields[0], validate=True)
            except (binascii.Error, ValueError) as exc:
                raise TokenizerError(f"{vocab_file}:{lineno}: bad base64: {exc}") from exc
            try:
                rank = int(fields[1])
            except ValueError as exc:
                raise TokenizerError(f"{vocab_file}:{lineno}: bad rank: {exc}") from exc
            if rank in seen_ranks:
                raise TokenizerError(f"{vocab_file}:{lineno}: duplicate rank {rank}")
            if token in ranks:
                raise TokenizerError(
                    f"{vocab_file}:{lineno}: duplicate token bytes {token!r}"
                )
            ranks[token] = rank
            seen_ranks.add(rank)
    if not ranks:
        raise TokenizerError(f"{vocab_file}: empty ranks file")
    missing = [b for b in range(256) if bytes([b]) not in ranks]
    if missing:
        raise TokenizerError(
            f"{vocab_file}: ranks file lacks {len(missing)} single-byte entries "
            f"(first missing: {missing[0]}); encoding would not be total"
        )

    if specials_file is None:
        candidate = Path(str(vocab_file) + ".specials.json")
        specials_file = candidate if candidate.exists() else None
    specials: dict[str, int] = {}
    if specials_file is not None:
        with open(specials_file, encoding="utf-8") as f:
            raw = json.load(f)
        specials = {str(k): int(v) for k, v in raw.items()}
        collisions = seen_ranks.intersection(specials.values())
        if collisions:
            raise TokenizerError(
                f"{specials_file}: special ids collide with ranks: {sorted(collisions)[:5]}"
            )
    return Tokenizer(ranks=ranks, specials=specials)


def save_ranks(ranks: dict[bytes, int], path: str | Path) -> None:
    """Write a ranks file in the documented format (sorted by rank)."""
    with open(path, "wb") as f:
        for token, rank in sorted(ranks.items(), key=lambda kv: kv[1]):
            f.write(base64.b64encode(token) + b" " + str(rank).encode() + b"\n")
