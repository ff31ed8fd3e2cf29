"""Biasing-list construction.

Train-time lists follow the stochastic recipe: with probability p_empty the
list is dropped entirely; otherwise L ~ Uniform{l_min..l_max} false-bias
words are sampled from the global lexicon excluding every reference word,
and one mined true-bias word is added unless dropped with probability
p_neg. Test-time Scenario-1 lists carry all rare reference words plus
false-bias fill to a fixed size; Scenario-2 lists are distractors only.
All draws come from per-utterance streams, so results are independent of
processing order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BiasingError
from .rng import derive_rng
from .textnorm import NormalizedText
from .vocab import GlobalBiasLexicon, VocabStats, is_rare


@dataclass
class BiasingList:
    utterance_id: str
    words: list[str]
    true_bias: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        if len(set(self.words)) != len(self.words):
            raise BiasingError(f"{self.utterance_id}: duplicate words in biasing list")
        extra = self.true_bias - set(self.words)
        if extra:
            raise BiasingError(
                f"{self.utterance_id}: true-bias words missing from list: {sorted(extra)[:5]}"
            )

    @property
    def is_empty(self) -> bool:
        return not self.words


@dataclass
class TrainSamplingConfig:
    l_min: int = 25
    l_max: int = 150
    p_neg: float = 0.3
    p_empty: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.l_min <= self.l_max:
            raise BiasingError(f"need 1 <= l_min <= l_max, got [{self.l_min}, {self.l_max}]")
        if not 0.0 <= self.p_neg <= 1.0:
            raise BiasingError(f"p_neg must be in [0, 1], got {self.p_neg}")
        if not 0.0 <= self.p_empty <= 1.0:
            raise BiasingError(f"p_empty must be in [0, 1], got {self.p_empty}")


def _shuffled(rng, words: list[str]) -> list[str]:
    return [words[i] for i in rng.permutation(len(words))]


def _sample_without_replacement(rng, pool: list[str], k: int, what: str, utt_id: str) -> list[str]:
    if len(pool) < k:
        raise BiasingError(
            f"{utt_id}: need {k} {what} but only {len(pool)} available "
            f"(short by {k - len(pool)})"
        )
    if k == 0:
        return []
    idx = rng.choice(len(pool), size=k, replace=False)
    return [pool[i] for i in idx]


def build_train_list(
    utt_id: str,
    ref_words: NormalizedText,
    mined_rare: list[str],
    lexicon: GlobalBiasLexicon,
    cfg: TrainSamplingConfig,
) -> BiasingList:
    """Stochastic train-time list for one utterance (may be empty)."""
    rng = derive_rng(cfg.seed, "train-list", utt_id)
    if rng.random() < cfg.p_empty:
        return BiasingList(utterance_id=utt_id, words=[], true_bias=set())

    length = int(rng.integers(cfg.l_min, cfg.l_max + 1))
    ref_set = set(ref_words.words)
    pool = [w for w in lexicon.words if w not in ref_set]
    words = _sample_without_replacement(rng, pool, length, "false-bias words", utt_id)

    true_bias: set[str] = set()
    if mined_rare:
        candidate = mined_rare[int(rng.integers(len(mined_rare)))]
        if not rng.random() < cfg.p_neg:
            words.append(candidate)
            true_bias.add(candidate)
    words = _shuffled(rng, words)
    return BiasingList(utterance_id=utt_id, words=words, true_bias=true_bias)


def build_scenario1_list(
    utt_id: str,
    ref: NormalizedText,
    stats: VocabStats,
    rare_pool: list[str],
    n: int,
    seed: int,
) -> BiasingList:
    """Fixed-size test list: all rare reference words plus false-bias fill."""
    seen: set[str] = set()
    true_words: list[str] = []
    for word in ref.words:
        if word not in seen:
            seen.add(word)
            if is_rare(stats, word):
                true_words.append(word)
    if len(true_words) > n:
        raise BiasingError(
            f"{utt_id}: {len(true_words)} rare reference words exceed list size {n}"
        )
    rng = derive_rng(seed, "scenario1", utt_id)
    ref_set = set(ref.words)
    pool = [w for w in rare_pool if w not in ref_set]
    fill = _sample_without_replacement(rng, pool, n - len(true_words), "false-bias words", utt_id)
    words = _shuffled(rng, true_words + fill)
    return BiasingList(utterance_id=utt_id, words=words, true_bias=set(true_words))


def build_scenario2_list(
    utt_id: str,
    ref: NormalizedText,
    rare_pool: list[str],
    n: int,
    seed: int,
) -> BiasingList:
    """Fixed-size test list of false-bias words only."""
    rng = derive_rng(seed, "scenario2", utt_id)
    ref_set = set(ref.words)
    pool = [w for w in rare_pool if w not in ref_set]
    words = _shuffled(rng, _sample_without_replacement(rng, pool, n, "false-bias words", utt_id))
    return BiasingList(utterance_id=utt_id, words=words, true_bias=set())


def render_prompt(blist: BiasingList) -> str:
    """Space-joined prompt text; empty list renders as the empty string."""
    return " ".join(blist.words)
