import { DatasetSummary, FileSummary, JobState, Report } from "./api.js";

/** Everything the pages render from; populated only from API payloads. */
export interface ViewState {
  session: boolean;
  uploads: FileSummary[];
  datasets: DatasetSummary[];
  activeJob: { jobId: string; state: JobState } | null;
  resultsView: Report | null;
}

export function initialState(): ViewState {
  return {
    session: false,
    uploads: [],
    datasets: [],
    activeJob: null,
    resultsView: null,
  };
}
