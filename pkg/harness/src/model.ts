/**
 * Tiny prompt-conditioned seq2seq decoder.
 *
 * The decoder is a single GRU over [bos, prompt bytes, sep, shifted target
 * tokens], initialized from a per-utterance pseudo speech feature vector (a
 * deterministic stand-in for a real acoustic encoder at desk scale). Loss is
 * computed on the target positions only, so manifest weights line up with
 * target tokens one to one.
 */
import * as tf from "@tensorflow/tfjs";
import { promptToTokens, TrainManifestRecord } from "./manifest.js";

export interface ModelConfig {
  vocabSize: number;
  embedDim: number;
  hiddenDim: number;
  featureDim: number;
}

export const DEFAULT_DIMS = { embedDim: 32, hiddenDim: 48, featureDim: 24 };

type VarMap = Record<string, tf.Variable>;

/** fnv-1a, the classic 32-bit string hash. */
function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Deterministic per-utterance stand-in for encoder speech features. */
export function pseudoSpeechFeatures(utteranceId: string, featureDim: number): Float32Array {
  const rand = mulberry32(fnv1a(utteranceId));
  const out = new Float32Array(featureDim);
  for (let i = 0; i < featureDim; i++) {
    out[i] = rand() * 2 - 1;
  }
  return out;
}

export class Seq2SeqModel {
  readonly config: ModelConfig;
  readonly vars: VarMap;

  constructor(config: ModelConfig, vars: VarMap) {
    this.config = config;
    this.vars = vars;
  }

  static init(config: ModelConfig, seed: number): Seq2SeqModel {
    const { vocabSize, embedDim, hiddenDim, featureDim } = config;
    const std = 0.08;
    let next = seed;
    const normal = (shape: number[]) => tf.variable(tf.randomNormal(shape, 0, std, "float32", next++));
    const zeros = (shape: number[]) => tf.variable(tf.zeros(shape));
    const vars: VarMap = {
      embed: normal([vocabSize, embedDim]),
      encW: normal([featureDim, hiddenDim]),
      encB: zeros([hiddenDim]),
      wz: normal([embedDim, hiddenDim]),
      uz: normal([hiddenDim, hiddenDim]),
      bz: zeros([hiddenDim]),
      wr: normal([embedDim, hiddenDim]),
      ur: normal([hiddenDim, hiddenDim]),
      br: zeros([hiddenDim]),
      wn: normal([embedDim, hiddenDim]),
      un: normal([hiddenDim, hiddenDim]),
      bn: zeros([hiddenDim]),
      outW: normal([hiddenDim, vocabSize]),
      outB: zeros([vocabSize]),
    };
    return new Seq2SeqModel(config, vars);
  }

  get bosId(): number {
    return this.config.vocabSize - 2;
  }

  get sepId(): number {
    return this.config.vocabSize - 1;
  }

  trainableVariables(): tf.Variable[] {
    return Object.values(this.vars);
  }

  /** Decoder input ids: bos, prompt bytes, sep, target shifted right. */
  inputIdsFor(record: TrainManifestRecord): number[] {
    const prompt = promptToTokens(record.prompt);
    return [this.bosId, ...prompt, this.sepId, ...record.target_tokens.slice(0, -1)];
  }

  /**
   * Logits for the target positions of one utterance, shape
   * [target_tokens.length, vocabSize]. Must be called inside tf.tidy or the
   * caller must dispose the result.
   */
  targetLogits(
    record: TrainManifestRecord,
    options: { training: boolean; dropoutRate: number; dropoutSeed: number },
  ): tf.Tensor2D {
    const { hiddenDim, featureDim } = this.config;
    const v = this.vars;
    const inputIds = this.inputIdsFor(record);
    const targetLen = record.target_tokens.length;

    const features = tf.tensor2d(pseudoSpeechFeatures(record.id, featureDim), [1, featureDim]);
    let state = tf.tanh(tf.add(tf.matMul(features, v.encW), v.encB));
    const embedded = tf.gather(v.embed, tf.tensor1d(inputIds, "int32"));
    const steps = tf.unstack(embedded.reshape([inputIds.length, 1, this.config.embedDim]));

    const outputs: tf.Tensor[] = [];
    const keepFrom = inputIds.length - targetLen;
    for (let t = 0; t < steps.length; t++) {
      const x = steps[t];
      const z = tf.sigmoid(tf.add(tf.add(tf.matMul(x, v.wz), tf.matMul(state, v.uz)), v.bz));
      const r = tf.sigmoid(tf.add(tf.add(tf.matMul(x, v.wr), tf.matMul(state, v.ur)), v.br));
      const n = tf.tanh(
        tf.add(tf.add(tf.matMul(x, v.wn), tf.matMul(tf.mul(r, state), v.un)), v.bn),
      );
      state = tf.add(tf.mul(tf.sub(tf.onesLike(z), z), n), tf.mul(z, state));
      if (t >= keepFrom) {
        outputs.push(state);
      }
    }
    let hidden = tf.concat(outputs, 0).reshape([targetLen, hiddenDim]);
    if (options.training && options.dropoutRate > 0) {
      hidden = tf.dropout(hidden, options.dropoutRate, undefined, options.dropoutSeed);
    }
    return tf.add(tf.matMul(hidden, v.outW), v.outB) as tf.Tensor2D;
  }
}

interface CheckpointFile {
  config: ModelConfig;
  vars: Record<string, { shape: number[]; data: string }>;
}

export function serializeModel(model: Seq2SeqModel): string {
  const vars: CheckpointFile["vars"] = {};
  for (const [name, variable] of Object.entries(model.vars)) {
    const data = variable.dataSync() as Float32Array;
    vars[name] = {
      shape: variable.shape.slice(),
      data: Buffer.from(data.buffer, data.byteOffset, data.byteLength).toString("base64"),
    };
  }
  return JSON.stringify({ config: model.config, vars }, null, 1);
}

export function deserializeModel(text: string): Seq2SeqModel {
  const parsed = JSON.parse(text) as CheckpointFile;
  const vars: VarMap = {};
  for (const [name, entry] of Object.entries(parsed.vars)) {
    const raw = Buffer.from(entry.data, "base64");
    const data = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
    vars[name] = tf.variable(tf.tensor(Array.from(data), entry.shape, "float32"));
  }
  return new Seq2SeqModel(parsed.config, vars);
}
