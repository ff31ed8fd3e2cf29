"""Subcommand front-end for the toolkit pipelines.

Subcommands compose through files only and are idempotent; identical inputs
plus an identical seed produce byte-identical outputs regardless of --jobs.
"""
from __future__ import annotations

import argparse
import functools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

from . import align as align_mod
from . import biasing, loss, manifest, metrics, simulator, textnorm, vocab
from .errors import BiasforgeError
from .tokenizer import BASELINE_PROMPT_BUDGET, Tokenizer, load_tokenizer

T = TypeVar("T")
U = TypeVar("U")

SEED_ENV_VAR = "BIASFORGE_SEED"


def resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise BiasforgeError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return 0


def _normalizer(args) -> Callable[[str], textnorm.NormalizedText]:
    if getattr(args, "no_normalize", False):
        return textnorm.from_pretokenized
    return textnorm.normalize


def _parallel_map(fn: Callable[[T], U], items: Sequence[T], jobs: int) -> list[U]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items, chunksize=chunksize))


def _load_utterances(path: str) -> list[manifest.UtteranceRecord]:
    records = list(manifest.read_jsonl(path, manifest.UtteranceRecord))
    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise BiasforgeError(f"{path}: duplicate utterance id {rec.id!r}")
        seen.add(rec.id)
    return records


def _pair_hyps(
    refs: list[manifest.UtteranceRecord], hyps_path: str
) -> list[tuple[manifest.UtteranceRecord, manifest.UtteranceRecord]]:
    hyps = {rec.id: rec for rec in _load_utterances(hyps_path)}
    pairs = []
    for ref in refs:
        hyp = hyps.get(ref.id)
        if hyp is None:
            raise BiasforgeError(f"{hyps_path}: no hypothesis for utterance {ref.id!r}")
        pairs.append((ref, hyp))
    return pairs


def _load_lists(path: str) -> dict[str, biasing.BiasingList]:
    out: dict[str, biasing.BiasingList] = {}
    for rec in manifest.read_jsonl(path, manifest.BiasingListRecord):
        if rec.id in out:
            raise BiasforgeError(f"{path}: duplicate biasing list for {rec.id!r}")
        out[rec.id] = rec.to_biasing_list()
    return out


def _load_alignments(path: str) -> dict[str, align_mod.WordAlignment]:
    out: dict[str, align_mod.WordAlignment] = {}
    for rec in manifest.read_jsonl(path, manifest.AlignmentRecord):
        out[rec.id] = rec.alignment()
    return out


# Worker functions are module level so ProcessPoolExecutor can pickle them.


def _align_worker(pair: tuple[str, str, str], no_normalize: bool) -> manifest.AlignmentRecord:
    utt_id, ref_text, hyp_text = pair
    norm = textnorm.from_pretokenized if no_normalize else textnorm.normalize
    alignment = align_mod.align_words(norm(ref_text), norm(hyp_text))
    return manifest.AlignmentRecord(id=utt_id, ops=alignment.ops)


def _simulate_worker(
    item: tuple[str, str],
    stats: vocab.VocabStats,
    lists: dict[str, biasing.BiasingList] | None,
    model: simulator.ErrorModel,
    distractor_slope: float,
    no_normalize: bool,
) -> manifest.UtteranceRecord:
    utt_id, ref_text = item
    norm = textnorm.from_pretokenized if no_normalize else textnorm.normalize
    ref = norm(ref_text)
    blist = lists.get(utt_id) if lists is not None else None
    eff_model = model
    if blist is not None and distractor_slope > 0:
        n_false = len(blist.words) - len(blist.true_bias)
        eff_model = simulator.distractor_model(model, distractor_slope, n_false)
    hyp = simulator.simulate_hypothesis(utt_id, ref, stats, blist, eff_model)
    return manifest.UtteranceRecord(id=utt_id, text=hyp.rendered)


def _train_manifest_worker(
    item: tuple[str, str, list[str] | None, str | None],
    stats: vocab.VocabStats,
    lexicon: vocab.GlobalBiasLexicon,
    tok: Tokenizer,
    cfg: biasing.TrainSamplingConfig,
    beta: float,
    budget: int,
    no_normalize: bool,
) -> manifest.TrainManifestRecord:
    utt_id, ref_text, mined, hyp_text = item
    norm = textnorm.from_pretokenized if no_normalize else textnorm.normalize
    ref = norm(ref_text)
    if mined is None:
        alignment = align_mod.align_words(ref, norm(hyp_text))
        mined = vocab.mine_misrecognized_rare(ref, alignment, stats)
    blist = biasing.build_train_list(utt_id, ref, mined, lexicon, cfg)
    prompt = tok.truncate_prompt(biasing.render_prompt(blist), budget)
    surviving = set(prompt.split())
    true_bias_words = sorted(blist.true_bias & surviving)
    spans = tok.word_token_spans(ref)
    token_ids = tok.encode_words(ref)
    target = loss.assign_weights(ref, token_ids, spans, set(true_bias_words), beta=beta)
    return manifest.TrainManifestRecord(
        id=utt_id,
        prompt=prompt,
        target_text=ref.rendered,
        target_tokens=[int(t) for t in target.token_ids],
        weights=[float(w) for w in target.weights],
        true_bias_words=true_bias_words,
    )


# Subcommand implementations.


def cmd_normalize(args) -> int:
    refs = _load_utterances(args.refs)
    if args.normalizer_cmd:
        ext = textnorm.ExternalNormalizer(command=args.normalizer_cmd.split())
        normalized = ext.normalize_lines([rec.text for rec in refs])
    else:
        normalized = [textnorm.normalize(rec.text) for rec in refs]
    out = [
        manifest.UtteranceRecord(id=rec.id, text=norm.rendered, audio_path=rec.audio_path)
        for rec, norm in zip(refs, normalized)
    ]
    manifest.write_jsonl(args.out, out)
    return 0


def cmd_build_vocab(args) -> int:
    norm = _normalizer(args)
    refs = _load_utterances(args.refs)
    stats = vocab.build_stats((norm(rec.text) for rec in refs), args.mass_threshold)
    vocab.save_stats(stats, args.out)
    reloaded = vocab.load_stats(args.out)
    if reloaded.common != stats.common or reloaded.total != stats.total:
        raise BiasforgeError(f"{args.out}: vocabulary round-trip mismatch")
    return 0


def cmd_align(args) -> int:
    refs = _load_utterances(args.refs)
    pairs = _pair_hyps(refs, args.hyps)
    items = [(ref.id, ref.text, hyp.text) for ref, hyp in pairs]
    worker = functools.partial(_align_worker, no_normalize=args.no_normalize)
    records = _parallel_map(worker, items, args.jobs)
    norm = _normalizer(args)
    for rec, (_, ref_text, hyp_text) in zip(records, items):
        alignment = rec.alignment()
        if alignment.ref_words() != list(norm(ref_text).words):
            raise BiasforgeError(f"{rec.id}: alignment does not reconstruct the reference")
        if alignment.hyp_words() != list(norm(hyp_text).words):
            raise BiasforgeError(f"{rec.id}: alignment does not reconstruct the hypothesis")
    manifest.write_jsonl(args.out, records)
    return 0


def cmd_mine_bias_words(args) -> int:
    norm = _normalizer(args)
    refs = _load_utterances(args.refs)
    stats = vocab.load_stats(args.vocab)
    if args.aligns:
        alignments = _load_alignments(args.aligns)
        mined_lists = []
        for ref in refs:
            alignment = alignments.get(ref.id)
            if alignment is None:
                raise BiasforgeError(f"{args.aligns}: no alignment for {ref.id!r}")
            mined_lists.append(vocab.mine_misrecognized_rare(norm(ref.text), alignment, stats))
    elif args.hyps:
        pairs = _pair_hyps(refs, args.hyps)
        mined_lists = []
        for ref, hyp in pairs:
            ref_n = norm(ref.text)
            alignment = align_mod.align_words(ref_n, norm(hyp.text))
            mined_lists.append(vocab.mine_misrecognized_rare(ref_n, alignment, stats))
    else:
        raise BiasforgeError("mine-bias-words requires --aligns or --hyps")
    lexicon = vocab.build_global_lexicon(mined_lists)
    vocab.save_lexicon(lexicon, args.out)
    return 0


def cmd_make_train_manifest(args) -> int:
    norm = _normalizer(args)
    refs = _load_utterances(args.refs)
    stats = vocab.load_stats(args.vocab)
    lexicon = vocab.load_lexicon(args.lexicon)
    tok = load_tokenizer(args.tokenizer)
    seed = resolve_seed(args.seed)
    cfg = biasing.TrainSamplingConfig(
        l_min=args.l_min, l_max=args.l_max, p_neg=args.p_neg, p_empty=args.p_empty, seed=seed
    )
    if args.aligns:
        alignments = _load_alignments(args.aligns)
        items = []
        for ref in refs:
            alignment = alignments.get(ref.id)
            if alignment is None:
                raise BiasforgeError(f"{args.aligns}: no alignment for {ref.id!r}")
            mined = vocab.mine_misrecognized_rare(norm(ref.text), alignment, stats)
            items.append((ref.id, ref.text, mined, None))
    elif args.hyps:
        pairs = _pair_hyps(refs, args.hyps)
        items = [(ref.id, ref.text, None, hyp.text) for ref, hyp in pairs]
    else:
        raise BiasforgeError("make-train-manifest requires --aligns or --hyps")
    worker = functools.partial(
        _train_manifest_worker,
        stats=stats,
        lexicon=lexicon,
        tok=tok,
        cfg=cfg,
        beta=args.beta,
        budget=args.budget,
        no_normalize=args.no_normalize,
    )
    records = _parallel_map(worker, items, args.jobs)
    for rec in records:
        if len(rec.weights) != len(rec.target_tokens):
            raise BiasforgeError(f"{rec.id}: weight/token length mismatch")
        if rec.prompt and len(tok.encode(rec.prompt)) > args.budget:
            raise BiasforgeError(f"{rec.id}: prompt exceeds budget {args.budget}")
    manifest.write_jsonl(args.out, records)
    return 0


def cmd_make_test_lists(args) -> int:
    norm = _normalizer(args)
    refs = _load_utterances(args.refs)
    lexicon = vocab.load_lexicon(args.lexicon)
    seed = resolve_seed(args.seed)
    stats = vocab.load_stats(args.vocab) if args.vocab else None
    if args.scenario == 1 and stats is None:
        raise BiasforgeError("scenario 1 requires --vocab for the rarity rule")
    records = []
    for ref in refs:
        ref_n = norm(ref.text)
        if args.scenario == 1:
            blist = biasing.build_scenario1_list(
                ref.id, ref_n, stats, lexicon.words, args.n, seed
            )
        else:
            blist = biasing.build_scenario2_list(ref.id, ref_n, lexicon.words, args.n, seed)
        records.append(manifest.BiasingListRecord.from_biasing_list(blist))
    manifest.write_jsonl(args.out, records)

    for rec, ref in zip(records, refs):
        ref_words = set(norm(ref.text).words)
        if len(rec.words) != args.n:
            raise BiasforgeError(f"{rec.id}: list has {len(rec.words)} words, expected {args.n}")
        false_words = set(rec.words) - set(rec.true_bias)
        if false_words & ref_words:
            raise BiasforgeError(f"{rec.id}: false-bias word occurs in the reference")
        if args.scenario == 2 and set(rec.words) & ref_words:
            raise BiasforgeError(f"{rec.id}: scenario-2 list overlaps the reference")
    return 0


def cmd_simulate(args) -> int:
    refs = _load_utterances(args.refs)
    stats = vocab.load_stats(args.vocab)
    lists = _load_lists(args.lists) if args.lists else None
    if lists is not None:
        missing = [rec.id for rec in refs if rec.id not in lists]
        if missing:
            raise BiasforgeError(f"{args.lists}: no biasing list for {missing[0]!r}")
    pool = _read_wordlist(args.pool) if args.pool else []
    model = simulator.ErrorModel(
        p_sub_common=args.p_sub_common,
        p_sub_rare=args.p_sub_rare,
        p_del=args.p_del,
        p_ins=args.p_ins,
        bias_effect=args.bias_effect,
        confusion_pool=pool,
        seed=resolve_seed(args.seed),
    )
    worker = functools.partial(
        _simulate_worker,
        stats=stats,
        lists=lists,
        model=model,
        distractor_slope=args.distractor_slope,
        no_normalize=args.no_normalize,
    )
    records = _parallel_map(worker, [(rec.id, rec.text) for rec in refs], args.jobs)
    manifest.write_jsonl(args.out, records)
    return 0


def _read_wordlist(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def _rates_dict(report: metrics.EvalReport) -> dict:
    return {
        "num_utterances": report.num_utterances,
        "rates": report.rates(),
        "macro_rates": report.macro_rates(),
        "counts": {
            "total": metrics.counts_to_dict(report.counts.total),
            "biased": metrics.counts_to_dict(report.counts.biased),
            "unbiased": metrics.counts_to_dict(report.counts.unbiased),
            "oov": metrics.counts_to_dict(report.counts.oov),
        },
    }


def cmd_evaluate(args) -> int:
    norm = _normalizer(args)
    refs = _load_utterances(args.refs)
    pairs = _pair_hyps(refs, args.hyps)
    lists = _load_lists(args.lists)
    vocabulary: frozenset[str] = frozenset()
    if args.vocab:
        vocabulary = vocab.load_stats(args.vocab).vocabulary
    per_utt = []
    for ref, hyp in pairs:
        blist = lists.get(ref.id)
        if blist is None:
            raise BiasforgeError(f"{args.lists}: no biasing list for {ref.id!r}")
        alignment = align_mod.align_words(norm(ref.text), norm(hyp.text))
        oov = vocab.oov_subset(blist.words, vocabulary) if args.vocab else set()
        counts = metrics.classify_errors(alignment, blist, oov)
        per_utt.append(metrics.UtteranceReport(utterance_id=ref.id, counts=counts))
    report = metrics.aggregate(per_utt)
    manifest.write_json(args.out, _rates_dict(report))
    if args.per_utt:
        _write_per_utt_tsv(args.per_utt, report)
    return 0


def _write_per_utt_tsv(path: str, report: metrics.EvalReport) -> None:
    def fmt(rate: float | None) -> str:
        return "" if rate is None else f"{rate:.6f}"

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(
            "id\twer\tu_wer\tr_wer\toov_wer\tsub\tdel\tins\tref\n"
        )
        for utt in report.per_utterance:
            total = utt.counts.total
            f.write(
                "\t".join(
                    [
                        utt.utterance_id,
                        fmt(utt.counts.total.rate()),
                        fmt(utt.counts.unbiased.rate()),
                        fmt(utt.counts.biased.rate()),
                        fmt(utt.counts.oov.rate()),
                        str(total.sub),
                        str(total.dele),
                        str(total.ins),
                        str(total.ref),
                    ]
                )
                + "\n"
            )


def cmd_report(args) -> int:
    baseline = manifest.read_json(args.baseline)
    system = manifest.read_json(args.system)
    rows = []
    for key, label in (
        ("wer", "WER"),
        ("u_wer", "U-WER"),
        ("r_wer", "R-WER"),
        ("oov_wer", "OOV-WER"),
    ):
        base = baseline["rates"].get(key)
        sys_rate = system["rates"].get(key)
        if base is not None and base > 0 and sys_rate is not None:
            rel = metrics.relative_improvement(base, sys_rate)
        else:
            rel = None
        rows.append((label, base, sys_rate, rel))

    def fmt(value: float | None) -> str:
        return "-" if value is None else f"{value:.2f}"

    print(f"{'metric':<8} {'baseline':>9} {'system':>9} {'rel.impr%':>10}")
    for label, base, sys_rate, rel in rows:
        print(f"{label:<8} {fmt(base):>9} {fmt(sys_rate):>9} {fmt(rel):>10}")
    if args.out:
        manifest.write_json(
            args.out,
            {
                "comparison": [
                    {
                        "metric": label,
                        "baseline": base,
                        "system": sys_rate,
                        "relative_improvement": rel,
                    }
                    for label, base, sys_rate, rel in rows
                ]
            },
        )
    return 0


def _add_common(parser: argparse.ArgumentParser, *, jobs: bool = False) -> None:
    parser.add_argument("--no-normalize", action="store_true", help="trust inputs as pre-normalized")
    if jobs:
        parser.add_argument("--jobs", type=int, default=1, help="parallel workers (deterministic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biasforge",
        description="Data preparation and evaluation for contextual biasing in ASR.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="normalize reference transcripts")
    p.add_argument("--refs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalizer-cmd", default=None, help="external normalizer command for parity runs")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("build-vocab", help="word frequencies and the common/rare split")
    p.add_argument("--refs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mass-threshold", type=float, default=0.9)
    _add_common(p)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("align", help="align references with hypotheses")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.add_argument("--out", required=True)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("mine-bias-words", help="collect misrecognized rare words")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", default=None)
    p.add_argument("--aligns", default=None)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_mine_bias_words)

    p = sub.add_parser("make-train-manifest", help="training prompts, targets, and loss weights")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", default=None)
    p.add_argument("--aligns", default=None)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--p-neg", type=float, default=0.3)
    p.add_argument("--p-empty", type=float, default=0.2)
    p.add_argument("--l-min", type=int, default=25)
    p.add_argument("--l-max", type=int, default=150)
    p.add_argument("--beta", type=float, default=1.1)
    p.add_argument("--budget", type=int, default=BASELINE_PROMPT_BUDGET)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_make_train_manifest)

    p = sub.add_parser("make-test-lists", help="scenario-1/2 test-time biasing lists")
    p.add_argument("--refs", required=True)
    p.add_argument("--vocab", default=None)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, default=70)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_make_test_lists)

    p = sub.add_parser("simulate", help="generate noisy hypotheses from references")
    p.add_argument("--refs", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--lists", default=None)
    p.add_argument("--pool", default=None, help="confusion word list (one per line)")
    p.add_argument("--p-sub-common", type=float, default=0.05)
    p.add_argument("--p-sub-rare", type=float, default=0.4)
    p.add_argument("--p-del", type=float, default=0.02)
    p.add_argument("--p-ins", type=float, default=0.02)
    p.add_argument("--bias-effect", type=float, default=0.3)
    p.add_argument("--distractor-slope", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="WER, U-WER, R-WER, OOV-WER")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.add_argument("--lists", required=True)
    p.add_argument("--vocab", default=None, help="training vocabulary for OOV partitioning")
    p.add_argument("--out", required=True)
    p.add_argument("--per-utt", default=None, help="optional per-utterance TSV")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="baseline vs system comparison table")
    p.add_argument("--baseline", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BiasforgeError as exc:
        print(f"biasforge: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"biasforge: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
