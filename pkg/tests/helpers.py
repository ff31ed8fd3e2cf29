"""Shared test scaffolding: toy BPE ranks, synthetic corpora, oracles."""
from __future__ import annotations

import re
from collections import Counter

import numpy as np

_CHUNK_RE = re.compile(r" ?\S+|\s+")

COMMON_WORDS = [
    "the", "a", "of", "to", "and", "in", "is", "it", "you", "that",
    "he", "was", "for", "on", "are", "with", "as", "his", "they", "at",
    "be", "this", "have", "from", "or", "one", "had", "by", "word", "but",
    "not", "what", "all", "were", "we", "when", "your", "can", "said", "there",
]

RARE_WORDS = [
    "tinnitus", "phanariote", "spirometry", "kimbolton", "polygynandy",
    "mcphillips", "lukyamuzi", "zygomatic", "quixotic", "bathysphere",
    "ornithopter", "palimpsest", "queloz", "synecdoche", "马铃薯",
    "abseiling", "chiaroscuro", "dendrochronology", "eigenvector", "fjord",
    "glockenspiel", "hagiography", "isthmus", "juxtaposition", "kaleidoscope",
    "labyrinthine", "mnemonic", "nadir", "obsidian", "peripatetic",
    "quasar", "rhizome", "s芭蕾", "tesseract", "umlaut",
    "verisimilitude", "wunderkind", "xylophone", "yggdrasil", "zeitgeist",
]


def train_toy_ranks(lines: list[str], num_merges: int = 300) -> dict[bytes, int]:
    """Tiny deterministic BPE trainer for fixtures: 256 byte tokens + merges."""
    ranks = {bytes([b]): b for b in range(256)}
    chunk_freq: Counter[bytes] = Counter()
    for line in lines:
        for m in _CHUNK_RE.finditer(line):
            chunk_freq[m.group().encode("utf-8")] += 1
    parts = {c: tuple(c[i : i + 1] for i in range(len(c))) for c in chunk_freq}
    rank = 256
    for _ in range(num_merges):
        pairs: Counter[tuple[bytes, bytes]] = Counter()
        for c, ps in parts.items():
            freq = chunk_freq[c]
            for a, b in zip(ps, ps[1:]):
                pairs[(a, b)] += freq
        candidates = [(n, a + b, (a, b)) for (a, b), n in pairs.items() if a + b not in ranks]
        if not candidates:
            break
        _, merged, (a, b) = max(candidates, key=lambda t: (t[0], t[1]))
        ranks[merged] = rank
        rank += 1
        for c, ps in parts.items():
            if a not in ps:
                continue
            out = []
            i = 0
            while i < len(ps):
                if i + 1 < len(ps) and ps[i] == a and ps[i + 1] == b:
                    out.append(merged)
                    i += 2
                else:
                    out.append(ps[i])
                    i += 1
            parts[c] = tuple(out)
    return ranks


def training_text() -> list[str]:
    """Deterministic text used to learn the toy merges."""
    rng = np.random.default_rng(20240917)
    lines = []
    for _ in range(400):
        k = int(rng.integers(4, 12))
        words = [COMMON_WORDS[int(rng.integers(len(COMMON_WORDS)))] for _ in range(k)]
        if rng.random() < 0.6:
            words.append(RARE_WORDS[int(rng.integers(len(RARE_WORDS)))])
        lines.append(" " + " ".join(words))
    return lines


def synthetic_corpus(
    n_utts: int, seed: int, rare_rate: float = 0.35, min_len: int = 5, max_len: int = 12
) -> list[tuple[str, str]]:
    """(utterance id, reference text) pairs with a Zipf-ish common/rare mix."""
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, len(COMMON_WORDS) + 1)
    weights /= weights.sum()
    out = []
    for i in range(n_utts):
        k = int(rng.integers(min_len, max_len + 1))
        words = [
            COMMON_WORDS[int(rng.choice(len(COMMON_WORDS), p=weights))] for _ in range(k)
        ]
        n_rare = int(rng.random() < rare_rate) + int(rng.random() < rare_rate / 2)
        for _ in range(n_rare):
            pos = int(rng.integers(len(words) + 1))
            words.insert(pos, RARE_WORDS[int(rng.integers(len(RARE_WORDS)))])
        out.append((f"utt{i:04d}", " ".join(words)))
    return out


def brute_force_distance(ref: tuple[str, ...], hyp: tuple[str, ...]) -> int:
    """Exhaustive recursive edit distance; independent of the DP kernels."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        best = go(i + 1, j + 1) + (0 if ref[i] == hyp[j] else 1)
        best = min(best, go(i + 1, j) + 1)
        best = min(best, go(i, j + 1) + 1)
        return best

    return go(0, 0)


def enumerate_scripts_distance(ref: tuple[str, ...], hyp: tuple[str, ...]) -> int:
    """Plain recursion over all edit scripts, no memoization. Small inputs only."""
    def go(i: int, j: int) -> int:
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        return min(
            go(i + 1, j + 1) + (0 if ref[i] == hyp[j] else 1),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )

    return go(0, 0)
