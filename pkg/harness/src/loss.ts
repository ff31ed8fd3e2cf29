/**
 * Token-level cross-entropy losses (sum reduction, float32).
 *
 * The weighted form multiplies each position's negative log-likelihood by
 * the manifest weight for that position before summing; weights arrive
 * verbatim from the training manifest.
 */
import * as tf from "@tensorflow/tfjs";

/** Per-position negative log-likelihood, shape [T]. */
export function tokenNll(logits: tf.Tensor2D, targets: number[]): tf.Tensor1D {
  return tf.tidy(() => {
    const lse = tf.logSumExp(logits, 1);
    const oneHot = tf.oneHot(tf.tensor1d(targets, "int32"), logits.shape[1]);
    const picked = tf.sum(tf.mul(logits, oneHot), 1);
    return tf.sub(lse, picked) as tf.Tensor1D;
  });
}

/** sum_i weights[i] * nll_i with weights straight from the manifest. */
export function weightedCrossEntropy(
  logits: tf.Tensor2D,
  targets: number[],
  weights: number[],
): tf.Scalar {
  if (weights.length !== targets.length) {
    throw new Error(`${weights.length} weights for ${targets.length} targets`);
  }
  return tf.tidy(() =>
    tf.sum(tf.mul(tokenNll(logits, targets), tf.tensor1d(weights, "float32"))),
  ) as tf.Scalar;
}

/** Plain sum of per-token negative log-likelihoods (no weighting path). */
export function unweightedCrossEntropy(logits: tf.Tensor2D, targets: number[]): tf.Scalar {
  return tf.tidy(() => tf.sum(tokenNll(logits, targets))) as tf.Scalar;
}
