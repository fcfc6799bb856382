import { ApiClient } from "./api.js";
import { ViewState } from "./state.js";

export interface AppContext {
  api: ApiClient;
  state: ViewState;
  navigate: (hash: string) => void;
  /** Poll cadence override; production default is 1 s with backoff to 5 s. */
  pollIntervalMs?: number;
}
