/**
 * Harness CLI.
 *
 *   node dist/cli.js pretrain --manifest train.jsonl --out ckpt/ [--seed 0] [--epochs 2]
 *   node dist/cli.js train --manifest train.jsonl --checkpoint ckpt/checkpoint.json \
 *        --out run/ [--lr 1e-7] [--dropout 0.1] [--epochs 1] [--seed 0] [--unweighted]
 */
import { join } from "path";
import { loadManifest, ManifestError } from "./manifest.js";
import { pretrainModel, runFinetune, saveCheckpoint, writeLossLog, DEFAULT_TRAIN_OPTIONS } from "./train.js";

function parseArgs(argv: string[]): { command: string; flags: Map<string, string | boolean> } {
  const [command, ...rest] = argv;
  const flags = new Map<string, string | boolean>();
  for (let i = 0; i < rest.length; i++) {
    const arg = rest[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const key = arg.slice(2);
    if (i + 1 < rest.length && !rest[i + 1].startsWith("--")) {
      flags.set(key, rest[++i]);
    } else {
      flags.set(key, true);
    }
  }
  return { command: command ?? "", flags };
}

function requireFlag(flags: Map<string, string | boolean>, name: string): string {
  const value = flags.get(name);
  if (typeof value !== "string") {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

function numFlag(flags: Map<string, string | boolean>, name: string, fallback: number): number {
  const value = flags.get(name);
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new Error(`--${name} expects a number, got ${String(value)}`);
  }
  return parsed;
}

export function main(argv: string[]): number {
  try {
    const { command, flags } = parseArgs(argv);
    if (command === "pretrain") {
      const records = loadManifest(requireFlag(flags, "manifest"));
      const outDir = requireFlag(flags, "out");
      const seed = numFlag(flags, "seed", 0);
      const epochs = numFlag(flags, "epochs", 2);
      const { model, log } = pretrainModel(records, seed, epochs);
      const path = saveCheckpoint(outDir, model);
      writeLossLog(join(outDir, "pretrain_loss_log.csv"), log);
      console.log(`pretrained checkpoint: ${path} (${log.length} steps)`);
      return 0;
    }
    if (command === "train") {
      const log = runFinetune({
        manifestPath: requireFlag(flags, "manifest"),
        checkpointPath: requireFlag(flags, "checkpoint"),
        outDir: requireFlag(flags, "out"),
        options: {
          learningRate: numFlag(flags, "lr", DEFAULT_TRAIN_OPTIONS.learningRate),
          dropout: numFlag(flags, "dropout", DEFAULT_TRAIN_OPTIONS.dropout),
          epochs: numFlag(flags, "epochs", DEFAULT_TRAIN_OPTIONS.epochs),
          seed: numFlag(flags, "seed", DEFAULT_TRAIN_OPTIONS.seed),
          unweighted: flags.get("unweighted") === true,
        },
      });
      const first = log[0];
      const last = log[log.length - 1];
      console.log(
        `fine-tune done: ${log.length} steps, ` +
          `first loss ${first?.loss.toFixed(4)}, last loss ${last?.loss.toFixed(4)}`,
      );
      return 0;
    }
    console.error(`unknown command: ${command || "(none)"}; use pretrain or train`);
    return 2;
  } catch (err) {
    if (err instanceof ManifestError) {
      console.error(`manifest error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

const isDirectRun = process.argv[1]?.endsWith("cli.js");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
