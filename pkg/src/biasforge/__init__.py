"""biasforge: data preparation and evaluation for contextual biasing in ASR.

Pipelines: normalize transcripts, align references with hypotheses, mine
misrecognized rare words, build train-time and test-time biasing lists,
render prompts with token budgets, assign weighted cross-entropy targets,
simulate noisy hypotheses, and score WER / U-WER / R-WER / OOV-WER.
"""

from .align import AlignOp, WordAlignment, align_words, edit_counts, edit_distance
from .biasing import (
    BiasingList,
    TrainSamplingConfig,
    build_scenario1_list,
    build_scenario2_list,
    build_train_list,
    render_prompt,
)
from .errors import BiasforgeError
from .loss import WeightedTarget, assign_weights, weighted_ce, weighted_ce_grad
from .metrics import (
    Counts,
    EvalReport,
    PartitionedCounts,
    UtteranceReport,
    aggregate,
    classify_errors,
    relative_improvement,
)
from .simulator import ErrorModel, simulate_hypothesis, sweep_list_size
from .textnorm import NormalizedText, normalize
from .tokenizer import (
    BASELINE_PROMPT_BUDGET,
    EXTENDED_POSITIONS,
    TokenSpan,
    Tokenizer,
    extended_prompt_budget,
    load_tokenizer,
)
from .vocab import (
    GlobalBiasLexicon,
    VocabStats,
    build_global_lexicon,
    build_stats,
    is_rare,
    mine_misrecognized_rare,
    oov_subset,
)

__version__ = "0.1.0"

__all__ = [
    "AlignOp",
    "BASELINE_PROMPT_BUDGET",
    "BiasforgeError",
    "BiasingList",
    "Counts",
    "ErrorModel",
    "EvalReport",
    "EXTENDED_POSITIONS",
    "GlobalBiasLexicon",
    "NormalizedText",
    "PartitionedCounts",
    "TokenSpan",
    "Tokenizer",
    "TrainSamplingConfig",
    "UtteranceReport",
    "VocabStats",
    "WeightedTarget",
    "WordAlignment",
    "aggregate",
    "align_words",
    "assign_weights",
    "build_global_lexicon",
    "build_scenario1_list",
    "build_scenario2_list",
    "build_stats",
    "build_train_list",
    "classify_errors",
    "edit_counts",
    "edit_distance",
    "extended_prompt_budget",
    "is_rare",
    "load_tokenizer",
    "mine_misrecognized_rare",
    "normalize",
    "oov_subset",
    "relative_improvement",
    "render_prompt",
    "simulate_hypothesis",
    "sweep_list_size",
    "weighted_ce",
    "weighted_ce_grad",
]
