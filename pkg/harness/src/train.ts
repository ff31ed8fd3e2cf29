/**
 * Training loops: a short pretraining pass that creates the base
 * checkpoint (no prompts, plain cross-entropy), and the fine-tune pass that
 * consumes a training manifest, conditioning on prompts and applying the
 * manifest's per-token loss weights verbatim.
 */
import * as tf from "@tensorflow/tfjs";
import { mkdirSync, writeFileSync, readFileSync } from "fs";
import { join } from "path";
import { loadManifest, TrainManifestRecord } from "./manifest.js";
import {
  DEFAULT_DIMS,
  deserializeModel,
  ModelConfig,
  Seq2SeqModel,
  serializeModel,
} from "./model.js";
import { unweightedCrossEntropy, weightedCrossEntropy } from "./loss.js";
import { vocabSizeFor } from "./manifest.js";

export interface TrainOptions {
  learningRate: number;
  dropout: number;
  epochs: number;
  seed: number;
  /** When true the loss ignores manifest weights (comparison runs only). */
  unweighted: boolean;
}

export const DEFAULT_TRAIN_OPTIONS: TrainOptions = {
  learningRate: 1e-7,
  dropout: 0.1,
  epochs: 1,
  seed: 0,
  unweighted: false,
};

export interface StepLog {
  step: number;
  utteranceId: string;
  loss: number;
  learningRate: number;
}

function stripPrompt(record: TrainManifestRecord): TrainManifestRecord {
  return { ...record, prompt: "" };
}

function trainLoop(
  model: Seq2SeqModel,
  records: TrainManifestRecord[],
  options: TrainOptions,
): StepLog[] {
  const usable = records.filter((r) => r.target_tokens.length > 0);
  const optimizer = tf.train.adam(options.learningRate);
  const totalSteps = usable.length * options.epochs;
  const log: StepLog[] = [];
  let step = 0;
  for (let epoch = 0; epoch < options.epochs; epoch++) {
    for (const record of usable) {
      // Linear rate decay across the whole run.
      const lr = options.learningRate * (1 - step / Math.max(totalSteps, 1));
      (optimizer as unknown as { learningRate: number }).learningRate = lr;
      const lossFn = (): tf.Scalar =>
        tf.tidy(() => {
          const logits = model.targetLogits(record, {
            training: true,
            dropoutRate: options.dropout,
            dropoutSeed: options.seed + step,
          });
          return options.unweighted
            ? unweightedCrossEntropy(logits, record.target_tokens)
            : weightedCrossEntropy(logits, record.target_tokens, record.weights);
        });
      const { value, grads } = tf.variableGrads(lossFn, model.trainableVariables());
      optimizer.applyGradients(grads as unknown as Parameters<typeof optimizer.applyGradients>[0]);
      log.push({
        step,
        utteranceId: record.id,
        loss: value.dataSync()[0],
        learningRate: lr,
      });
      value.dispose();
      Object.values(grads).forEach((g) => g.dispose());
      step++;
    }
  }
  optimizer.dispose();
  return log;
}

export function pretrainModel(
  records: TrainManifestRecord[],
  seed: number,
  epochs = 2,
  dims: { embedDim: number; hiddenDim: number; featureDim: number } = DEFAULT_DIMS,
): { model: Seq2SeqModel; log: StepLog[] } {
  const config: ModelConfig = { vocabSize: vocabSizeFor(records), ...dims };
  const model = Seq2SeqModel.init(config, seed);
  // No prompts and no weighting: this pass stands in for the generic
  // pretrained recognizer the fine-tune starts from.
  const log = trainLoop(model, records.map(stripPrompt), {
    learningRate: 1e-2,
    dropout: 0.0,
    epochs,
    seed,
    unweighted: true,
  });
  return { model, log };
}

export function finetuneModel(
  model: Seq2SeqModel,
  records: TrainManifestRecord[],
  options: TrainOptions,
): StepLog[] {
  return trainLoop(model, records, options);
}

export function writeLossLog(path: string, log: StepLog[]): void {
  const rows = ["step,utterance_id,loss,learning_rate"];
  for (const entry of log) {
    rows.push(`${entry.step},${entry.utteranceId},${entry.loss},${entry.learningRate}`);
  }
  writeFileSync(path, rows.join("\n") + "\n", "utf-8");
}

export function saveCheckpoint(dir: string, model: Seq2SeqModel): string {
  mkdirSync(dir, { recursive: true });
  const path = join(dir, "checkpoint.json");
  writeFileSync(path, serializeModel(model), "utf-8");
  return path;
}

export function loadCheckpoint(path: string): Seq2SeqModel {
  return deserializeModel(readFileSync(path, "utf-8"));
}

export interface FinetuneRunArgs {
  manifestPath: string;
  checkpointPath: string;
  outDir: string;
  options: TrainOptions;
}

/** Full fine-tune run: validate manifest, train, write checkpoint + CSV log. */
export function runFinetune(args: FinetuneRunArgs): StepLog[] {
  const records = loadManifest(args.manifestPath);
  const model = loadCheckpoint(args.checkpointPath);
  const log = finetuneModel(model, records, args.options);
  mkdirSync(args.outDir, { recursive: true });
  saveCheckpoint(args.outDir, model);
  writeLossLog(join(args.outDir, "loss_log.csv"), log);
  return log;
}
