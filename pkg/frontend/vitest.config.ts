import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // The acceptance tests spawn the real Python annotation service.
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
