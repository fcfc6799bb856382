import { defineConfig } from "vitest/config";

// The integration test spawns the Python API server on this port; giving
// the happy-dom window the same origin keeps fetch("/api/...") same-origin,
// exactly like the console served by the API process.
export const SERVER_PORT = 18999;

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: {
        url: `http://127.0.0.1:${SERVER_PORT}/`,
      },
    },
    testTimeout: 180_000,
    hookTimeout: 180_000,
    fileParallelism: false,
  },
});
