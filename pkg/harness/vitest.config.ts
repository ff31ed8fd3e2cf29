import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // Training-loop tests run a tfjs CPU backend; give them headroom.
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
