import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // interop tests shell out to external tools; keep files sequential so
    // timing stays predictable on small machines
    fileParallelism: false,
    testTimeout: 120_000,
  },
});
