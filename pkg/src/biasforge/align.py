"""Word-level minimum-edit-distance alignment with backtrace.

Uniform (1,1,1) costs. Backtrace ties resolve match > substitute > delete
> insert, which keeps misrecognized words paired up for bias-word mining
and makes alignments fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import dp_fill
from .textnorm import NormalizedText

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class AlignOp:
    kind: str
    ref_word: str | None = None
    hyp_word: str | None = None


@dataclass
class WordAlignment:
    ops: list[AlignOp]

    @property
    def distance(self) -> int:
        return sum(1 for op in self.ops if op.kind != MATCH)

    def ref_words(self) -> list[str]:
        return [op.ref_word for op in self.ops if op.ref_word is not None]

    def hyp_words(self) -> list[str]:
        return [op.hyp_word for op in self.ops if op.hyp_word is not None]


def _intern(ref: tuple[str, ...], hyp: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    table: dict[str, int] = {}
    for w in ref:
        if w not in table:
            table[w] = len(table)
    for w in hyp:
        if w not in table:
            table[w] = len(table)
    ref_ids = np.fromiter((table[w] for w in ref), dtype=np.int32, count=len(ref))
    hyp_ids = np.fromiter((table[w] for w in hyp), dtype=np.int32, count=len(hyp))
    return ref_ids, hyp_ids


def align_words(
    ref: NormalizedText, hyp: NormalizedText, backend: str | None = None
) -> WordAlignment:
    """Minimum-edit-distance alignment of two normalized word sequences."""
    ref_w, hyp_w = ref.words, hyp.words
    ref_ids, hyp_ids = _intern(ref_w, hyp_w)
    dist = dp_fill(ref_ids, hyp_ids, backend=backend)

    ops: list[AlignOp] = []
    i, j = len(ref_w), len(hyp_w)
    while i > 0 or j > 0:
        here = dist[i, j]
        if i > 0 and j > 0 and ref_w[i - 1] == hyp_w[j - 1] and here == dist[i - 1, j - 1]:
            ops.append(AlignOp(MATCH, ref_w[i - 1], hyp_w[j - 1]))
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and here == dist[i - 1, j - 1] + 1:
            ops.append(AlignOp(SUBSTITUTE, ref_w[i - 1], hyp_w[j - 1]))
            i -= 1
            j -= 1
        elif i > 0 and here == dist[i - 1, j] + 1:
            ops.append(AlignOp(DELETE, ref_w[i - 1], None))
            i -= 1
        else:
            ops.append(AlignOp(INSERT, None, hyp_w[j - 1]))
            j -= 1
    ops.reverse()
    return WordAlignment(ops=ops)


def edit_counts(alignment: WordAlignment) -> tuple[int, int, int, int, int]:
    """(substitutions, deletions, insertions, matches, reference length)."""
    subs = dels = ins = matches = 0
    for op in alignment.ops:
        if op.kind == MATCH:
            matches += 1
        elif op.kind == SUBSTITUTE:
            subs += 1
        elif op.kind == DELETE:
            dels += 1
        elif op.kind == INSERT:
            ins += 1
        else:
            raise ValueError(f"unknown op kind {op.kind!r}")
    return subs, dels, ins, matches, matches + subs + dels


def edit_distance(
    ref: NormalizedText, hyp: NormalizedText, backend: str | None = None
) -> int:
    """Distance only, without building the op list."""
    ref_ids, hyp_ids = _intern(ref.words, hyp.words)
    return int(dp_fill(ref_ids, hyp_ids, backend=backend)[-1, -1])
