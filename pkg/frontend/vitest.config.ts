import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // End-to-end tests spawn a real server process and stream at wall-clock
    // 20 Hz, so they need generous timeouts and must not fight each other
    // for CPU (the cadence assertion is timing-sensitive).
    testTimeout: 30_000,
    hookTimeout: 120_000,
    fileParallelism: false,
  },
});
