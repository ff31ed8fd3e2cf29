"""Word-frequency statistics and the common/rare partition.

A word is rare when it falls outside the most common words accounting for
the configured cumulative share (default 90%) of word occurrences in the
training corpus. Occurrences are counted with multiplicity. Boundary ties
are admitted in descending (count, word) order, so among equal counts the
lexicographically later word enters the common set first.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .align import DELETE, SUBSTITUTE, WordAlignment
from .errors import VocabError
from .textnorm import NormalizedText


@dataclass
class VocabStats:
    counts: dict[str, int]
    total: int
    mass_threshold: float
    common: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.mass_threshold <= 1.0:
            raise VocabError(f"mass_threshold must be in (0, 1], got {self.mass_threshold}")
        if self.total != sum(self.counts.values()):
            raise VocabError("total does not match the sum of counts")
        self.common = frozenset(_common_prefix(self.counts, self.total, self.mass_threshold))

    @property
    def vocabulary(self) -> frozenset[str]:
        return frozenset(self.counts)


def _common_prefix(counts: dict[str, int], total: int, threshold: float) -> list[str]:
    target = threshold * total
    common: list[str] = []
    cumulative = 0
    for word, count in sorted(counts.items(), key=lambda kv: (kv[1], kv[0]), reverse=True):
        if cumulative >= target:
            break
        common.append(word)
        cumulative += count
    return common


def count_words(corpus: Iterable[NormalizedText]) -> Counter[str]:
    """Shardable word counting; merge shards with Counter addition."""
    counts: Counter[str] = Counter()
    for text in corpus:
        counts.update(text.words)
    return counts


def stats_from_counts(counts: dict[str, int], mass_threshold: float = 0.9) -> VocabStats:
    if not counts:
        raise VocabError("cannot build vocabulary statistics from an empty corpus")
    return VocabStats(counts=dict(counts), total=sum(counts.values()), mass_threshold=mass_threshold)


def build_stats(corpus: Iterable[NormalizedText], mass_threshold: float = 0.9) -> VocabStats:
    """Exact counts over a corpus plus the derived common set."""
    return stats_from_counts(count_words(corpus), mass_threshold)


def is_rare(stats: VocabStats, word: str) -> bool:
    """True iff the word is outside the common set (unseen words are rare)."""
    return word not in stats.common


def mine_misrecognized_rare(
    utt_ref: NormalizedText, alignment: WordAlignment, stats: VocabStats
) -> list[str]:
    """Rare reference words the hypothesis got wrong, in order, deduplicated.

    Substitutions and deletions contribute; insertions carry no reference
    word and never do.
    """
    seen: set[str] = set()
    mined: list[str] = []
    for op in alignment.ops:
        if op.kind in (SUBSTITUTE, DELETE):
            word = op.ref_word
            if word not in seen and is_rare(stats, word):
                seen.add(word)
                mined.append(word)
    return mined


@dataclass
class GlobalBiasLexicon:
    """Corpus-wide ordered list of misrecognized rare words."""

    words: list[str]

    def __len__(self) -> int:
        return len(self.words)


def build_global_lexicon(mined: Iterable[list[str]]) -> GlobalBiasLexicon:
    """Union of per-utterance mined lists, first-occurrence order."""
    seen: set[str] = set()
    words: list[str] = []
    for wordlist in mined:
        for word in wordlist:
            if word not in seen:
                seen.add(word)
                words.append(word)
    return GlobalBiasLexicon(words=words)


def oov_subset(bias_words: Iterable[str], training_vocabulary: frozenset[str] | set[str]) -> set[str]:
    """Bias words absent from the training vocabulary."""
    return {w for w in bias_words if w not in training_vocabulary}


def save_stats(stats: VocabStats, path: str | Path) -> None:
    """Write `word<TAB>count` rows (descending count, word) plus a meta JSON."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word, count in sorted(stats.counts.items(), key=lambda kv: (kv[1], kv[0]), reverse=True):
            f.write(f"{word}\t{count}\n")
    meta = {"total": stats.total, "mass_threshold": stats.mass_threshold}
    with open(f"{path}.meta.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, sort_keys=True)
        f.write("\n")


def load_stats(path: str | Path) -> VocabStats:
    path = Path(path)
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise VocabError(f"{path}:{lineno}: expected 'word<TAB>count'")
            try:
                counts[fields[0]] = int(fields[1])
            except ValueError as exc:
                raise VocabError(f"{path}:{lineno}: bad count: {exc}") from exc
    with open(f"{path}.meta.json", encoding="utf-8") as f:
        meta = json.load(f)
    return stats_from_counts(counts, mass_threshold=float(meta["mass_threshold"]))


def save_lexicon(lexicon: GlobalBiasLexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word in lexicon.words:
            f.write(word + "\n")


def load_lexicon(path: str | Path) -> GlobalBiasLexicon:
    words: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            word = line.strip()
            if word and word not in seen:
                seen.add(word)
                words.append(word)
    return GlobalBiasLexicon(words=words)
