/**
 * Training-manifest records: the hand-off contract from the data toolkit.
 *
 * One JSON object per line: {id, prompt, target_text, target_tokens,
 * weights, true_bias_words}. weights[i] applies to target_tokens[i] and is
 * used verbatim in the loss; the harness never recomputes weights.
 */
import { readFileSync } from "fs";

export interface TrainManifestRecord {
  id: string;
  prompt: string;
  target_text: string;
  target_tokens: number[];
  weights: number[];
  true_bias_words: string[];
}

export class ManifestError extends Error {}

function requireField<T>(obj: Record<string, unknown>, key: string, where: string): T {
  if (!(key in obj)) {
    throw new ManifestError(`${where}: missing field "${key}"`);
  }
  return obj[key] as T;
}

export function parseRecord(data: Record<string, unknown>, where: string): TrainManifestRecord {
  const record: TrainManifestRecord = {
    id: requireField<string>(data, "id", where),
    prompt: requireField<string>(data, "prompt", where),
    target_text: requireField<string>(data, "target_text", where),
    target_tokens: requireField<number[]>(data, "target_tokens", where),
    weights: requireField<number[]>(data, "weights", where),
    true_bias_words: requireField<string[]>(data, "true_bias_words", where),
  };
  if (typeof record.id !== "string" || typeof record.prompt !== "string") {
    throw new ManifestError(`${where}: id and prompt must be strings`);
  }
  if (!Array.isArray(record.target_tokens) || !Array.isArray(record.weights)) {
    throw new ManifestError(`${where}: target_tokens and weights must be arrays`);
  }
  if (record.weights.length !== record.target_tokens.length) {
    throw new ManifestError(
      `${where}: ${record.weights.length} weights for ` +
        `${record.target_tokens.length} target tokens`,
    );
  }
  if (record.weights.some((w) => !(typeof w === "number" && w > 0))) {
    throw new ManifestError(`${where}: weights must be positive numbers`);
  }
  if (record.target_tokens.some((t) => !Number.isInteger(t) || t < 0)) {
    throw new ManifestError(`${where}: target tokens must be non-negative integers`);
  }
  return record;
}

/** Load and validate a whole manifest; any violation aborts before training. */
export function loadManifest(path: string): TrainManifestRecord[] {
  const text = readFileSync(path, "utf-8");
  const records: TrainManifestRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let data: unknown;
    try {
      data = JSON.parse(line);
    } catch (err) {
      throw new ManifestError(`${path}:${i + 1}: invalid JSON: ${(err as Error).message}`);
    }
    if (typeof data !== "object" || data === null || Array.isArray(data)) {
      throw new ManifestError(`${path}:${i + 1}: expected a JSON object`);
    }
    records.push(parseRecord(data as Record<string, unknown>, `${path}:${i + 1}`));
  }
  return records;
}

/**
 * Prompt text to decoder token ids. The toolkit's ranks files always cover
 * all 256 single bytes at ids 0..255, so byte-level encoding stays inside
 * the same id space as the pre-tokenized targets (a coarser split of it).
 */
export function promptToTokens(prompt: string): number[] {
  return Array.from(Buffer.from(prompt, "utf-8"));
}

/** Smallest embedding table that covers a manifest plus bos/sep specials. */
export function vocabSizeFor(records: TrainManifestRecord[]): number {
  let maxId = 255; // byte-level prompt ids are always possible
  for (const record of records) {
    for (const token of record.target_tokens) {
      if (token > maxId) maxId = token;
    }
  }
  return maxId + 1 + 2; // + bos, sep
}
