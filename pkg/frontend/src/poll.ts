import { ApiClient, JobStatus } from "./api.js";

export interface PollOptions {
  intervalMs?: number; // first delay (default 1 s)
  maxIntervalMs?: number; // backoff ceiling (default 5 s)
  onUpdate?: (status: JobStatus) => void;
}

/** Poll a job until it settles. The interval starts at 1 s and backs off
 * by a second per tick up to 5 s. */
export function pollJob(api: ApiClient, jobId: string, options: PollOptions = {}): Promise<JobStatus> {
  const first = options.intervalMs ?? 1000;
  const ceiling = options.maxIntervalMs ?? 5000;
  return new Promise((resolve, reject) => {
    let interval = first;
    const tick = async () => {
      let status: JobStatus;
      try {
        status = await api.getJob(jobId);
      } catch (error) {
        reject(error);
        return;
      }
      options.onUpdate?.(status);
      if (status.state === "done" || status.state === "failed") {
        resolve(status);
        return;
      }
      interval = Math.min(ceiling, interval + first);
      setTimeout(tick, interval);
    };
    setTimeout(tick, first);
  });
}
