"""Transcript text normalization.

Applied to every reference and hypothesis before alignment, counting, or
list construction. This is a deliberately small rule set: NFC, lowercase,
strip punctuation (keeping intra-word apostrophes), collapse whitespace.
It is not a full replacement for heavyweight ASR normalizers; for bit-exact
parity runs an external normalizer command can be plugged in at the CLI.
"""
from __future__ import annotations

import re
import subprocess
import unicodedata
from dataclasses import dataclass, field

# Anything outside the output alphabet (lowercase ASCII letters, digits,
# apostrophe) acts as a word separator.
_SEPARATOR_RE = re.compile(r"[^a-z0-9']+")


@dataclass(frozen=True)
class NormalizedText:
    """An ordered word sequence plus the raw string it came from."""

    words: tuple[str, ...]
    raw: str = ""

    @property
    def rendered(self) -> str:
        """Canonical single-space-joined form."""
        return " ".join(self.words)

    def __len__(self) -> int:
        return len(self.words)


def normalize(text: str) -> NormalizedText:
    """Normalize a transcript into lowercase words.

    Rules, in order: NFC-normalize, lowercase, replace every character
    outside [a-z0-9'] with a separator, strip apostrophes at word edges,
    drop empty words. Idempotent on its own output.
    """
    folded = unicodedata.normalize("NFC", text).lower()
    words = []
    for chunk in _SEPARATOR_RE.split(folded):
        word = chunk.strip("'")
        if word:
            words.append(word)
    return NormalizedText(words=tuple(words), raw=text)


def from_pretokenized(text: str) -> NormalizedText:
    """Wrap already-normalized text without applying any rules.

    Used by the CLI's --no-normalize path; the caller vouches that the
    input is whitespace-separated normalized words.
    """
    return NormalizedText(words=tuple(text.split()), raw=text)


@dataclass
class ExternalNormalizer:
    """Line-oriented external normalizer process, for parity runs.

    The command receives one transcript per stdin line and must emit one
    normalized line per input line.
    """

    command: list[str] = field(default_factory=list)

    def normalize_lines(self, lines: list[str]) -> list[NormalizedText]:
        joined = "\n".join(line.replace("\n", " ") for line in lines)
        proc = subprocess.run(
            self.command, input=joined, capture_output=True, text=True, check=True
        )
        out_lines = proc.stdout.splitlines()
        if len(out_lines) != len(lines):
            raise RuntimeError(
                f"external normalizer returned {len(out_lines)} lines "
                f"for {len(lines)} inputs"
            )
        return [
            NormalizedText(words=tuple(out.split()), raw=src)
            for out, src in zip(out_lines, lines)
        ]
