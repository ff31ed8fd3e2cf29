"""Weighted cross-entropy over target token sequences.

The loss is the plain sum over positions of w_i times the negative log
softmax probability of the target token, with w_i set to beta (> 1,
default 1.1) on every token of every true-bias word occurrence and 1
elsewhere. Evaluation is float64 with log-sum-exp stabilization and a
fixed position-major summation order, so beta = 1 reproduces unweighted
cross-entropy bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LossError
from .tokenizer import TokenSpan
from .textnorm import NormalizedText

DEFAULT_BETA = 1.1


@dataclass
class WeightedTarget:
    token_ids: np.ndarray
    weights: np.ndarray
    true_bias_spans: list[TokenSpan] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.token_ids = np.asarray(self.token_ids, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.token_ids.ndim != 1 or self.weights.ndim != 1:
            raise LossError("token_ids and weights must be 1-D")
        if self.token_ids.shape != self.weights.shape:
            raise LossError(
                f"weights length {self.weights.shape[0]} does not match "
                f"{self.token_ids.shape[0]} target tokens"
            )
        if np.any(self.weights <= 0):
            raise LossError("weights must be positive")


def assign_weights(
    target_words: NormalizedText,
    token_ids: list[int] | np.ndarray,
    spans: list[TokenSpan],
    true_bias_words: set[str],
    beta: float = DEFAULT_BETA,
) -> WeightedTarget:
    """Per-token weights for a tokenized target transcript.

    `token_ids` and `spans` must come from the tokenizer's
    leading-space-per-word rendering of `target_words`; every occurrence of
    a true-bias word gets beta on all of its span tokens.
    """
    if beta < 1.0:
        raise LossError(f"beta must be >= 1, got {beta}")
    if len(spans) != len(target_words.words):
        raise LossError(f"{len(spans)} spans for {len(target_words.words)} words")
    token_ids = np.asarray(token_ids, dtype=np.int64)
    weights = np.ones(token_ids.shape[0], dtype=np.float64)
    bias_spans: list[TokenSpan] = []
    for span in spans:
        if target_words.words[span.word_index] in true_bias_words:
            weights[span.start : span.end] = beta
            bias_spans.append(span)
    return WeightedTarget(token_ids=token_ids, weights=weights, true_bias_spans=bias_spans)


def _check_logits(logits: np.ndarray, target: WeightedTarget) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2:
        raise LossError(f"logits must be 2-D (positions x vocab), got shape {logits.shape}")
    if logits.shape[0] != target.token_ids.shape[0]:
        raise LossError(
            f"{logits.shape[0]} logit rows for {target.token_ids.shape[0]} target tokens"
        )
    if not np.all(np.isfinite(logits)):
        raise LossError("logits contain non-finite entries")
    vocab = logits.shape[1]
    if np.any(target.token_ids < 0) or np.any(target.token_ids >= vocab):
        bad = int(target.token_ids[(target.token_ids < 0) | (target.token_ids >= vocab)][0])
        raise LossError(f"token id {bad} outside vocabulary of size {vocab}")
    return logits


def weighted_ce(logits: np.ndarray, target: WeightedTarget) -> float:
    """Sum over positions of w_i * (-log softmax(logits_i)[token_i])."""
    logits = _check_logits(logits, target)
    if logits.shape[0] == 0:
        return 0.0
    rows = np.arange(logits.shape[0])
    peak = logits.max(axis=1, keepdims=True)
    lse = peak[:, 0] + np.log(np.exp(logits - peak).sum(axis=1))
    nll = lse - logits[rows, target.token_ids]
    total = 0.0
    for value in target.weights * nll:
        total += float(value)
    return total


def weighted_ce_grad(logits: np.ndarray, target: WeightedTarget) -> np.ndarray:
    """d(loss)/d(logits): row i is w_i * (softmax(logits_i) - onehot)."""
    logits = _check_logits(logits, target)
    if logits.shape[0] == 0:
        return np.zeros_like(logits)
    peak = logits.max(axis=1, keepdims=True)
    exp = np.exp(logits - peak)
    grad = exp / exp.sum(axis=1, keepdims=True)
    grad[np.arange(logits.shape[0]), target.token_ids] -= 1.0
    grad *= target.weights[:, None]
    return grad
