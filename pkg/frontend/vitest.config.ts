import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 60_000,
    hookTimeout: 60_000,
    // the engine subprocess tests share ports/processes; keep them serial
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
