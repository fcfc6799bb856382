import { ApiClient } from "./api.js";
import { AppContext } from "./context.js";
import { initialState } from "./state.js";
import { renderCompare } from "./pages/compare.js";
import { renderLogin } from "./pages/login.js";
import { renderResults } from "./pages/results.js";
import { renderUpload } from "./pages/upload.js";

export interface App {
  ctx: AppContext;
  navigate: (hash: string) => void;
}

/** Hash-routed single page app. navigate() renders synchronously so the
 * console does not depend on hashchange event timing. */
export function createApp(
  root: HTMLElement,
  api: ApiClient,
  options: { pollIntervalMs?: number } = {},
): App {
  const ctx: AppContext = {
    api,
    state: initialState(),
    navigate: (hash: string) => {
      if (window.location.hash !== hash) {
        window.location.hash = hash;
      }
      render(hash);
    },
    pollIntervalMs: options.pollIntervalMs,
  };

  const render = (hash: string) => {
    const resultsMatch = /^#\/results\/(.+)$/.exec(hash);
    if (resultsMatch && resultsMatch[1]) {
      renderResults(root, ctx, resultsMatch[1]);
    } else if (hash === "#/upload") {
      renderUpload(root, ctx);
    } else if (hash === "#/compare") {
      renderCompare(root, ctx);
    } else if (hash === "#/login") {
      renderLogin(root, ctx);
    } else {
      ctx.navigate(ctx.state.session ? "#/upload" : "#/login");
    }
  };

  window.addEventListener("hashchange", () => render(window.location.hash));
  if (window.location.hash) {
    render(window.location.hash);
  } else {
    ctx.navigate("#/login");
  }
  return { ctx, navigate: ctx.navigate };
}
