"""Synthetic noisy-hypothesis generator.

A parameterized word-level error channel over normalized references, used
as a desk-scale stand-in for a real recognizer when exercising the list
builders and metrics end to end. Per reference word a single draw picks
substitute / delete / keep (so empirical category rates converge to the
configured probabilities), and after every word slot an insertion fires
independently. Biasing is modeled as a multiplicative reduction of the
substitution probability for rare reference words present in the list.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .align import align_words
from .biasing import BiasingList, build_scenario1_list, build_scenario2_list
from .errors import SimulatorError
from .metrics import EvalReport, UtteranceReport, aggregate, classify_errors
from .rng import derive_rng
from .textnorm import NormalizedText
from .vocab import VocabStats, is_rare


@dataclass
class ErrorModel:
    p_sub_common: float = 0.05
    p_sub_rare: float = 0.4
    p_del: float = 0.02
    p_ins: float = 0.02
    bias_effect: float = 0.3
    confusion_pool: list[str] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_sub_common", "p_sub_rare", "p_del", "p_ins", "bias_effect"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SimulatorError(f"{name} must be in [0, 1], got {value}")
        if self.p_sub_rare < self.p_sub_common:
            raise SimulatorError("p_sub_rare must be >= p_sub_common")
        if self.p_sub_rare + self.p_del > 1.0:
            raise SimulatorError("p_sub_rare + p_del must not exceed 1")
        if any(p > 0 for p in (self.p_sub_common, self.p_sub_rare, self.p_ins)):
            if not self.confusion_pool:
                raise SimulatorError("confusion_pool required when error probabilities are positive")


def simulate_hypothesis(
    utt_id: str,
    ref: NormalizedText,
    stats: VocabStats,
    blist: BiasingList | None,
    model: ErrorModel,
) -> NormalizedText:
    """One noisy hypothesis, deterministic per (model.seed, utterance id)."""
    rng = derive_rng(model.seed, "simulate", utt_id)
    members = set(blist.words) if blist is not None else set()
    out: list[str] = []
    for word in ref.words:
        if is_rare(stats, word):
            p_sub = model.p_sub_rare * (model.bias_effect if word in members else 1.0)
        else:
            p_sub = model.p_sub_common
        u = rng.random()
        if u < p_sub:
            out.append(_confusion_word(rng, model.confusion_pool, exclude=word))
        elif u < p_sub + model.p_del:
            pass
        else:
            out.append(word)
        if rng.random() < model.p_ins:
            out.append(model.confusion_pool[int(rng.integers(len(model.confusion_pool)))])
    return NormalizedText(words=tuple(out), raw=" ".join(out))


def _confusion_word(rng, pool: list[str], exclude: str) -> str:
    candidates = [w for w in pool if w != exclude]
    if not candidates:
        raise SimulatorError(f"confusion pool has no substitute for {exclude!r}")
    return candidates[int(rng.integers(len(candidates)))]


def distractor_model(model: ErrorModel, slope: float, n_false: int) -> ErrorModel:
    """Variant whose rare-word substitution probability grows with the
    number of false-bias words in the list."""
    p = min(model.p_sub_rare + slope * n_false, 1.0 - model.p_del)
    return replace(model, p_sub_rare=max(p, model.p_sub_common))


def sweep_list_size(
    corpus: Iterable[tuple[str, NormalizedText]],
    stats: VocabStats,
    rare_pool: list[str],
    sizes: list[int],
    scenario: int,
    model: ErrorModel,
    distractor_slope: float = 0.0,
    list_seed: int = 0,
) -> list[EvalReport]:
    """Per-size evaluation reports using the distractor-sensitive channel."""
    if not sizes:
        raise SimulatorError("sizes must be non-empty")
    if scenario not in (1, 2):
        raise SimulatorError(f"scenario must be 1 or 2, got {scenario}")
    utterances = list(corpus)
    reports: list[EvalReport] = []
    for n in sizes:
        per_utt: list[UtteranceReport] = []
        for utt_id, ref in utterances:
            if scenario == 1:
                blist = build_scenario1_list(utt_id, ref, stats, rare_pool, n, list_seed)
            else:
                blist = build_scenario2_list(utt_id, ref, rare_pool, n, list_seed)
            n_false = len(blist.words) - len(blist.true_bias)
            hyp = simulate_hypothesis(
                utt_id, ref, stats, blist, distractor_model(model, distractor_slope, n_false)
            )
            counts = classify_errors(align_words(ref, hyp), blist)
            per_utt.append(UtteranceReport(utterance_id=utt_id, counts=counts))
        reports.append(aggregate(per_utt))
    return reports
