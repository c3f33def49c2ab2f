import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // The e2e suite spawns a real daemon; give it room on slow machines.
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
