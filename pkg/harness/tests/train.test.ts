import { mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { loadManifest, TrainManifestRecord } from "../src/manifest.js";
import { deserializeModel, serializeModel } from "../src/model.js";
import {
  finetuneModel,
  pretrainModel,
  runFinetune,
  saveCheckpoint,
  TrainOptions,
} from "../src/train.js";

const FIXTURE = new URL("../fixtures/train_manifest.jsonl", import.meta.url).pathname;

function options(overrides: Partial<TrainOptions> = {}): TrainOptions {
  return {
    learningRate: 1e-7,
    dropout: 0.1,
    epochs: 1,
    seed: 0,
    unweighted: false,
    ...overrides,
  };
}

function allOnes(records: TrainManifestRecord[]): TrainManifestRecord[] {
  return records.map((r) => ({ ...r, weights: r.weights.map(() => 1) }));
}

describe("fine-tune harness", () => {
  const records = loadManifest(FIXTURE);
  const { model: base } = pretrainModel(records, 7, 1);
  const checkpoint = serializeModel(base);

  it("first-step loss with all-ones weights equals the unweighted run", () => {
    const weightedLog = finetuneModel(
      deserializeModel(checkpoint),
      allOnes(records),
      options(),
    );
    const unweightedLog = finetuneModel(
      deserializeModel(checkpoint),
      records,
      options({ unweighted: true }),
    );
    expect(weightedLog[0].loss).toBe(unweightedLog[0].loss);
    // Same seed and checkpoint: the whole curves coincide, not just step 0.
    for (let i = 0; i < weightedLog.length; i++) {
      expect(weightedLog[i].loss).toBeCloseTo(unweightedLog[i].loss, 4);
    }
  });

  it("manifest weights change the loss exactly where they apply", () => {
    const weightedLog = finetuneModel(deserializeModel(checkpoint), records, options());
    const onesLog = finetuneModel(deserializeModel(checkpoint), allOnes(records), options());
    const hasBias = records.map((r) => r.weights.some((w) => w !== 1));
    expect(hasBias.some(Boolean)).toBe(true);
    for (let i = 0; i < records.length; i++) {
      if (hasBias[i]) {
        expect(weightedLog[i].loss).toBeGreaterThan(onesLog[i].loss);
      } else {
        expect(weightedLog[i].loss).toBe(onesLog[i].loss);
      }
    }
  });

  it("toy fine-tune over the 20-utterance fixture completes and logs", () => {
    const start = Date.now();
    const dir = mkdtempSync(join(tmpdir(), "harness-run-"));
    const ckptDir = join(dir, "ckpt");
    saveCheckpoint(ckptDir, base);
    const log = runFinetune({
      manifestPath: FIXTURE,
      checkpointPath: join(ckptDir, "checkpoint.json"),
      outDir: join(dir, "run"),
      options: options(),
    });
    expect(log).toHaveLength(records.filter((r) => r.target_tokens.length > 0).length);
    expect(log.every((entry) => Number.isFinite(entry.loss))).toBe(true);
    const csv = readFileSync(join(dir, "run", "loss_log.csv"), "utf-8").trim().split("\n");
    expect(csv[0]).toBe("step,utterance_id,loss,learning_rate");
    expect(csv).toHaveLength(log.length + 1);
    const ckpt = readFileSync(join(dir, "run", "checkpoint.json"), "utf-8");
    expect(JSON.parse(ckpt).config.vocabSize).toBe(base.config.vocabSize);
    // Well under the ten-minute CPU budget.
    expect(Date.now() - start).toBeLessThan(600_000);
  });

  it("learning rate decays linearly to the final step", () => {
    const log = finetuneModel(deserializeModel(checkpoint), records, options());
    const total = log.length;
    for (const entry of log) {
      expect(entry.learningRate).toBeCloseTo(1e-7 * (1 - entry.step / total), 12);
    }
  });

  it("pretraining actually reduces the loss it optimizes", () => {
    const { log } = pretrainModel(records, 11, 3);
    const first = log[0].loss;
    const last = log[log.length - 1].loss;
    expect(last).toBeLessThan(first);
  });
});
