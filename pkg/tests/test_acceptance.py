"""Acceptance suite: one test per release criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one [PASS]/[FAIL]
line per criterion. Stated time budgets are asserted inside the tests.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
import scipy.stats

from helpers import (
    brute_force_distance,
    synthetic_corpus,
)

from biasforge import cli
from biasforge.align import SUBSTITUTE, align_words, edit_counts
from biasforge.biasing import (
    BiasingList,
    TrainSamplingConfig,
    build_scenario1_list,
    build_scenario2_list,
    build_train_list,
)
from biasforge.loss import WeightedTarget, weighted_ce, weighted_ce_grad
from biasforge.manifest import UtteranceRecord, write_jsonl
from biasforge.metrics import aggregate, classify_errors
from biasforge.simulator import ErrorModel, simulate_hypothesis, sweep_list_size
from biasforge.textnorm import from_pretokenized, normalize
from biasforge.vocab import GlobalBiasLexicon, build_stats, stats_from_counts


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] {name}")
        raise
    print(f"\n[PASS] {name}")


def _nt(words):
    return from_pretokenized(" ".join(words))


def test_alignment_optimality():
    with criterion("alignment optimality vs exhaustive minimum (1000 pairs, <10s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(1001)
        alphabet = ["a", "b", "c", "d"]
        for _ in range(1000):
            ref = [alphabet[i] for i in rng.integers(0, 4, size=rng.integers(0, 7))]
            hyp = [alphabet[i] for i in rng.integers(0, 4, size=rng.integers(0, 7))]
            got = align_words(_nt(ref), _nt(hyp)).distance
            assert got == brute_force_distance(tuple(ref), tuple(hyp))
        assert time.perf_counter() - start < 10.0


def test_metric_decomposition():
    with criterion("metric decomposition and empty-list collapse (1000 instances, <10s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(1002)
        words = [f"w{i}" for i in range(10)]
        for _ in range(1000):
            ref = [words[i] for i in rng.integers(0, 10, size=rng.integers(0, 9))]
            hyp = [words[i] for i in rng.integers(0, 10, size=rng.integers(0, 9))]
            alignment = align_words(_nt(ref), _nt(hyp))
            members = sorted({words[i] for i in rng.integers(0, 10, size=rng.integers(0, 5))})
            parts = classify_errors(alignment, BiasingList("u", members))
            subs, dels, ins, _, ref_len = edit_counts(alignment)
            total = parts.total
            assert (total.sub, total.dele, total.ins, total.ref) == (subs, dels, ins, ref_len)
            empty = classify_errors(alignment, BiasingList("u", []))
            assert empty.biased.ref == 0 and empty.biased.errors == 0
            assert empty.unbiased.rate() == empty.total.rate()
        assert time.perf_counter() - start < 10.0


TABLE2_PAIRS = [
    # (reference, misrecognizing hypothesis, biasing list, true-bias word)
    (
        "foreign rule to the phanariote period",
        "foreign rule to the fanaret period",
        ["mcphillips", "phanariote", "lukyamuzi"],
        "phanariote",
    ),
    (
        "i feel pain in my ears with tinnitus",
        "i feel pain in my ears with cheetahs",
        ["kimbolton", "tinnitus", "polygynandy"],
        "tinnitus",
    ),
]


def test_transcript_fixtures():
    with criterion("transcript fixtures: one substitution; R-WER 100% vs 0% (exact)"):
        for ref_text, hyp_text, list_words, bias_word in TABLE2_PAIRS:
            ref = normalize(ref_text)
            hyp = normalize(hyp_text)
            alignment = align_words(ref, hyp)
            subs, dels, ins, _, _ = edit_counts(alignment)
            assert (subs, dels, ins) == (1, 0, 0)
            sub_op = next(op for op in alignment.ops if op.kind == SUBSTITUTE)
            assert sub_op.ref_word == bias_word

            blist = BiasingList("u", list_words, true_bias={bias_word})
            misrecognized = classify_errors(alignment, blist)
            assert misrecognized.biased.ref == 1
            assert misrecognized.biased.rate() == 100.0
            corrected = classify_errors(align_words(ref, ref), blist)
            assert corrected.biased.ref == 1
            assert corrected.biased.rate() == 0.0


def test_weighted_ce_numerics():
    with criterion("weighted CE analytic value and gradient check (100 instances, <30s)"):
        start = time.perf_counter()
        beta = 1.1
        S, V = 24, 96
        logits = np.zeros((S, V))
        weights = np.ones(S)
        weights[5] = beta
        target = WeightedTarget(token_ids=np.arange(S) % V, weights=weights)
        expected = (S - 1 + beta) * math.log(V)
        assert abs(weighted_ce(logits, target) - expected) <= 1e-12 * expected

        rng = np.random.default_rng(1004)
        step = 1e-4
        for _ in range(100):
            S = int(rng.integers(1, 33))
            V = int(rng.integers(2, 513))
            logits = rng.normal(size=(S, V))
            weights = np.where(rng.random(S) < 0.3, beta, 1.0)
            target = WeightedTarget(
                token_ids=rng.integers(0, V, size=S), weights=weights
            )
            grad = weighted_ce_grad(logits, target)
            coords = {(i, int(target.token_ids[i])) for i in range(S)}
            while len(coords) < min(S * V, S + 64):
                coords.add((int(rng.integers(S)), int(rng.integers(V))))
            fd = {}
            for i, j in sorted(coords):
                bumped = logits.copy()
                bumped[i, j] += step
                up = weighted_ce(bumped, target)
                bumped[i, j] -= 2 * step
                down = weighted_ce(bumped, target)
                fd[(i, j)] = (up - down) / (2 * step)
            scale = max(1.0, max(abs(v) for v in fd.values()))
            worst = max(abs(grad[i, j] - v) for (i, j), v in fd.items())
            assert worst <= 1e-5 * scale
        assert time.perf_counter() - start < 30.0


def test_sampling_calibration():
    with criterion(
        "sampling calibration: empty 0.20±0.02, inclusion 0.70±0.02, L uniform (<60s)"
    ):
        start = time.perf_counter()
        cfg = TrainSamplingConfig(seed=1005)
        lexicon = GlobalBiasLexicon(words=[f"lex{i:04d}" for i in range(400)])
        ref = _nt(["the", "cat", "sat", "on", "rarephrase", "mat"])
        mined = ["rarephrase"]
        n = 10_000
        empties = 0
        included = 0
        nonempty = 0
        lengths = []
        for i in range(n):
            blist = build_train_list(f"u{i:05d}", ref, mined, lexicon, cfg)
            if blist.is_empty:
                empties += 1
                continue
            nonempty += 1
            has_bias = "rarephrase" in blist.true_bias
            included += has_bias
            lengths.append(len(blist.words) - (1 if has_bias else 0))
        assert abs(empties / n - 0.20) <= 0.02
        assert abs(included / nonempty - 0.70) <= 0.02
        observed = np.bincount(lengths, minlength=151)[25:151]
        assert observed.sum() == nonempty
        result = scipy.stats.chisquare(observed)
        assert result.pvalue > 0.001
        assert time.perf_counter() - start < 60.0


def test_scenario_contracts():
    with criterion("scenario list contracts at sizes {35, 70, 150} (500 utterances)"):
        corpus = synthetic_corpus(500, seed=1006)
        stats = build_stats([normalize(t) for _, t in corpus], 0.9)
        pool = [f"pool{i:04d}" for i in range(800)]
        for n in (35, 70, 150):
            for utt_id, text in corpus:
                ref = normalize(text)
                rare_ref = {w for w in ref.words if w not in stats.common}
                s1 = build_scenario1_list(utt_id, ref, stats, pool, n, seed=1)
                assert len(s1.words) == n
                assert rare_ref <= set(s1.words)
                assert s1.true_bias == rare_ref
                assert not (set(s1.words) - s1.true_bias) & set(ref.words)
                s2 = build_scenario2_list(utt_id, ref, pool, n, seed=1)
                assert len(s2.words) == n
                assert not set(s2.words) & set(ref.words)
                assert s2.true_bias == set()


def test_vocabulary_rule():
    with criterion("90%-mass common set matches brute force; monotone in threshold"):
        worked = {"the": 5, "cat": 3, "sat": 1, "mat": 1}
        stats = stats_from_counts(worked, 0.9)
        assert stats.common == {"the", "cat", "sat"}

        def brute(counts, threshold):
            ordering = sorted(counts, key=lambda w: (counts[w], w), reverse=True)
            total = sum(counts.values())
            for k in range(len(ordering) + 1):
                if sum(counts[w] for w in ordering[:k]) >= threshold * total:
                    return set(ordering[:k])
            return set(ordering)

        assert stats.common == brute(worked, 0.9)
        rng = np.random.default_rng(1007)
        for _ in range(100):
            size = int(rng.integers(1, 30))
            counts = {
                f"w{i}": int(rng.integers(1, 60)) for i in range(size)
            }
            t1, t2 = sorted(rng.uniform(0.05, 1.0, size=2))
            assert stats_from_counts(counts, t1).common == brute(counts, t1)
            assert stats_from_counts(counts, t1).common <= stats_from_counts(counts, t2).common


def _run_pipeline(root, ranks_file, jobs: int) -> dict[str, bytes]:
    root.mkdir(parents=True, exist_ok=True)
    refs = root / "refs.jsonl"
    corpus = synthetic_corpus(50, seed=1008)
    write_jsonl(refs, [UtteranceRecord(id=u, text=t) for u, t in corpus])
    pool = root / "pool.txt"
    pool.write_text("\n".join(f"pool{i:04d}" for i in range(400)) + "\n", encoding="utf-8")
    vocab_path = root / "vocab.tsv"
    hyps = root / "hyps.jsonl"
    aligns = root / "aligns.jsonl"
    lexicon = root / "lexicon.txt"
    train = root / "train.jsonl"
    lists = root / "lists.jsonl"
    sim = root / "sim.jsonl"
    report = root / "report.json"
    steps = [
        ["build-vocab", "--refs", str(refs), "--out", str(vocab_path)],
        ["simulate", "--refs", str(refs), "--vocab", str(vocab_path), "--pool", str(pool),
         "--p-sub-common", "0.05", "--p-sub-rare", "0.6", "--p-del", "0.03",
         "--p-ins", "0.03", "--seed", "3", "--jobs", str(jobs), "--out", str(hyps)],
        ["align", "--refs", str(refs), "--hyps", str(hyps), "--jobs", str(jobs),
         "--out", str(aligns)],
        ["mine-bias-words", "--refs", str(refs), "--aligns", str(aligns),
         "--vocab", str(vocab_path), "--out", str(lexicon)],
    ]
    for step in steps:
        assert cli.main(step) == 0
    big_pool = root / "big_pool.txt"
    mined = lexicon.read_text(encoding="utf-8").splitlines()
    big_pool.write_text(
        "\n".join(dict.fromkeys(mined + [f"pool{i:04d}" for i in range(400)])) + "\n",
        encoding="utf-8",
    )
    steps = [
        ["make-train-manifest", "--refs", str(refs), "--aligns", str(aligns),
         "--vocab", str(vocab_path), "--lexicon", str(big_pool), "--tokenizer",
         str(ranks_file), "--seed", "5", "--jobs", str(jobs), "--out", str(train)],
        ["make-test-lists", "--refs", str(refs), "--vocab", str(vocab_path),
         "--lexicon", str(big_pool), "--scenario", "1", "--n", "70", "--seed", "5",
         "--out", str(lists)],
        ["simulate", "--refs", str(refs), "--vocab", str(vocab_path), "--pool", str(pool),
         "--lists", str(lists), "--bias-effect", "0.2", "--p-sub-common", "0.05",
         "--p-sub-rare", "0.6", "--p-del", "0.03", "--p-ins", "0.03", "--seed", "3",
         "--jobs", str(jobs), "--out", str(sim)],
        ["evaluate", "--refs", str(refs), "--hyps", str(sim), "--lists", str(lists),
         "--vocab", str(vocab_path), "--out", str(report)],
    ]
    for step in steps:
        assert cli.main(step) == 0
    outputs = {}
    for path in (vocab_path, hyps, aligns, lexicon, train, lists, sim, report):
        outputs[path.name] = path.read_bytes()
    outputs["vocab.tsv.meta.json"] = (root / "vocab.tsv.meta.json").read_bytes()
    return outputs


def test_end_to_end_determinism(tmp_path, toy_ranks_file):
    with criterion("end-to-end pipeline byte-identical across runs and --jobs"):
        first = _run_pipeline(tmp_path / "run1", toy_ranks_file, jobs=1)
        second = _run_pipeline(tmp_path / "run2", toy_ranks_file, jobs=1)
        parallel = _run_pipeline(tmp_path / "run3", toy_ranks_file, jobs=2)
        assert first.keys() == second.keys() == parallel.keys()
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"
            assert first[name] == parallel[name], f"{name} differs across --jobs"


def test_simulator_trend_shapes():
    with criterion(
        "trend shapes: R-WER non-decreasing in list size; biasing helps at n=70 (<2min)"
    ):
        start = time.perf_counter()
        corpus_raw = synthetic_corpus(200, seed=1009)
        corpus = [(u, normalize(t)) for u, t in corpus_raw]
        stats = build_stats([ref for _, ref in corpus], 0.9)
        pool = [f"pool{i:04d}" for i in range(800)]
        model = ErrorModel(
            p_sub_common=0.03,
            p_sub_rare=0.5,
            p_del=0.0,
            p_ins=0.0,
            bias_effect=0.3,
            confusion_pool=[f"conf{i:03d}" for i in range(60)],
            seed=1010,
        )
        reports = sweep_list_size(
            corpus, stats, pool, [35, 70, 150], 1, model, distractor_slope=0.004, list_seed=7
        )
        rates = [r.r_wer for r in reports]
        assert all(r is not None for r in rates)
        assert rates[0] <= rates[1] <= rates[2]

        # No-list baseline scored against the same n=70 lists.
        baseline_counts = []
        for utt_id, ref in corpus:
            blist = build_scenario1_list(utt_id, ref, stats, pool, 70, seed=7)
            hyp = simulate_hypothesis(utt_id, ref, stats, None, model)
            baseline_counts.append(classify_errors(align_words(ref, hyp), blist))
        baseline = aggregate(baseline_counts)
        assert reports[1].r_wer < baseline.r_wer
        assert time.perf_counter() - start < 120.0


def test_tokenizer_round_trip_and_budget(toy_tokenizer):
    with criterion("tokenizer round-trip on 10k lines; prompts never exceed 224 tokens"):
        rng = np.random.default_rng(1011)
        corpus = synthetic_corpus(10_000, seed=1012)
        decorations = ["", "!", "?", ",", " —", " (aside)", " …", " 马铃薯"]
        lines = []
        for i, (_, text) in enumerate(corpus):
            lines.append(text + decorations[i % len(decorations)])
        for line in lines:
            assert toy_tokenizer.decode(toy_tokenizer.encode(line)) == line

        pool = [f"pool{i:04d}" for i in range(400)]
        for trial in range(200):
            k = int(rng.integers(1, 220))
            words = [pool[int(rng.integers(len(pool)))] for _ in range(k)]
            prompt = " ".join(words)
            out = toy_tokenizer.truncate_prompt(prompt, 224)
            assert len(toy_tokenizer.encode(out)) <= 224
            kept = out.split()
            assert kept == words[: len(kept)]
