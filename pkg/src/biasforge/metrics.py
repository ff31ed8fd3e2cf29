"""Biasing-aware error-rate metrics.

Alignment errors are partitioned by biasing-list membership: substitutions
and deletions go by the reference word, insertions by the hypothesis word
(an inserted list word is an over-biasing symptom and lands in the biased
partition). WER covers everything, U-WER the unbiased partition, R-WER the
biased partition, and OOV-WER the biased partition restricted to list words
absent from the training vocabulary. Corpus rates are micro-averaged:
counts are pooled first, then divided.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .align import DELETE, INSERT, MATCH, SUBSTITUTE, WordAlignment
from .biasing import BiasingList
from .errors import MetricsError


@dataclass
class Counts:
    sub: int = 0
    dele: int = 0
    ins: int = 0
    ref: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(
            sub=self.sub + other.sub,
            dele=self.dele + other.dele,
            ins=self.ins + other.ins,
            ref=self.ref + other.ref,
        )

    @property
    def errors(self) -> int:
        return self.sub + self.dele + self.ins

    def rate(self) -> float | None:
        """Error rate in percent; None when the partition is undefined."""
        if self.ref == 0:
            return None
        return 100.0 * self.errors / self.ref


@dataclass
class PartitionedCounts:
    biased: Counts = field(default_factory=Counts)
    unbiased: Counts = field(default_factory=Counts)
    oov: Counts = field(default_factory=Counts)

    @property
    def total(self) -> Counts:
        return self.biased + self.unbiased

    def __add__(self, other: "PartitionedCounts") -> "PartitionedCounts":
        return PartitionedCounts(
            biased=self.biased + other.biased,
            unbiased=self.unbiased + other.unbiased,
            oov=self.oov + other.oov,
        )


def classify_errors(
    alignment: WordAlignment, blist: BiasingList, oov: set[str] | None = None
) -> PartitionedCounts:
    """Partition alignment ops by biasing-list membership.

    `oov` must be a subset of the list words; the oov partition applies the
    same attribution rules restricted to that subset.
    """
    members = set(blist.words)
    oov = oov or set()
    stray = oov - members
    if stray:
        raise MetricsError(f"oov words not in the biasing list: {sorted(stray)[:5]}")
    parts = PartitionedCounts()
    for op in alignment.ops:
        if op.kind == INSERT:
            target = parts.biased if op.hyp_word in members else parts.unbiased
            target.ins += 1
            if op.hyp_word in oov:
                parts.oov.ins += 1
            continue
        target = parts.biased if op.ref_word in members else parts.unbiased
        in_oov = op.ref_word in oov
        target.ref += 1
        if in_oov:
            parts.oov.ref += 1
        if op.kind == SUBSTITUTE:
            target.sub += 1
            if in_oov:
                parts.oov.sub += 1
        elif op.kind == DELETE:
            target.dele += 1
            if in_oov:
                parts.oov.dele += 1
        elif op.kind != MATCH:
            raise MetricsError(f"unknown op kind {op.kind!r}")
    return parts


@dataclass
class UtteranceReport:
    utterance_id: str
    counts: PartitionedCounts


@dataclass
class EvalReport:
    counts: PartitionedCounts
    num_utterances: int
    per_utterance: list[UtteranceReport] = field(default_factory=list)

    @property
    def wer(self) -> float | None:
        return self.counts.total.rate()

    @property
    def u_wer(self) -> float | None:
        return self.counts.unbiased.rate()

    @property
    def r_wer(self) -> float | None:
        return self.counts.biased.rate()

    @property
    def oov_wer(self) -> float | None:
        return self.counts.oov.rate()

    def rates(self) -> dict[str, float | None]:
        return {"wer": self.wer, "u_wer": self.u_wer, "r_wer": self.r_wer, "oov_wer": self.oov_wer}

    def macro_rates(self) -> dict[str, float | None]:
        """Mean of per-utterance rates (ignoring undefined partitions).

        Diagnostic only; the canonical corpus rates are the micro-averaged
        `rates()`.
        """
        out: dict[str, float | None] = {}
        for name, pick in (
            ("wer", lambda c: c.total),
            ("u_wer", lambda c: c.unbiased),
            ("r_wer", lambda c: c.biased),
            ("oov_wer", lambda c: c.oov),
        ):
            values = [
                r for r in (pick(u.counts).rate() for u in self.per_utterance) if r is not None
            ]
            out[name] = sum(values) / len(values) if values else None
        return out


def aggregate(
    reports: Iterable[PartitionedCounts | UtteranceReport],
) -> EvalReport:
    """Micro-average: pool counts over utterances, then compute rates."""
    pooled = PartitionedCounts()
    per_utt: list[UtteranceReport] = []
    count = 0
    for item in reports:
        if isinstance(item, UtteranceReport):
            per_utt.append(item)
            pooled = pooled + item.counts
        else:
            pooled = pooled + item
        count += 1
    if count == 0:
        raise MetricsError("cannot aggregate an empty report stream")
    return EvalReport(counts=pooled, num_utterances=count, per_utterance=per_utt)


def relative_improvement(baseline_rate: float, system_rate: float) -> float:
    """Percent reduction of system_rate relative to baseline_rate."""
    if baseline_rate <= 0:
        raise MetricsError(f"baseline rate must be positive, got {baseline_rate}")
    return 100.0 * (baseline_rate - system_rate) / baseline_rate


def counts_to_dict(counts: Counts) -> dict[str, int]:
    return {"sub": counts.sub, "del": counts.dele, "ins": counts.ins, "ref": counts.ref}


def counts_from_dict(data: dict[str, int]) -> Counts:
    return Counts(sub=int(data["sub"]), dele=int(data["del"]), ins=int(data["ins"]), ref=int(data["ref"]))
