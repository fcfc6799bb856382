import { ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import { AppContext } from "../context.js";
import { pollJob } from "../poll.js";

export function renderCompare(root: HTMLElement, ctx: AppContext): void {
  if (!ctx.state.session) {
    ctx.navigate("#/login");
    return;
  }
  clear(root);
  const error = el("p", { class: "error", id: "compare-error" });
  const progress = el("p", { class: "status", id: "compare-progress" });
  const fileSelect = el("select", { id: "file-select" });
  const datasetBoxes = el("div", { id: "dataset-choices" });
  const kInput = el("input", { id: "k-input", type: "number", value: "10", min: "1" });
  const thresholdInput = el("input", {
    id: "threshold-input",
    type: "number",
    value: "0.6",
    step: "0.05",
    min: "0",
    max: "1",
  });
  const runButton = el("button", { id: "run-model", disabled: true }, "Run Model");

  const selectedDatasets = (): string[] =>
    Array.from(
      datasetBoxes.querySelectorAll<HTMLInputElement>("input[type=checkbox]:checked"),
    ).map((box) => box.value);

  const updateRunState = () => {
    runButton.disabled = !fileSelect.value || selectedDatasets().length === 0;
  };

  const load = async () => {
    ctx.state.uploads = await ctx.api.listFiles();
    ctx.state.datasets = await ctx.api.listDatasets();
    clear(fileSelect);
    for (const file of ctx.state.uploads) {
      fileSelect.append(el("option", { value: file.file_id }, file.filename));
    }
    clear(datasetBoxes);
    for (const ds of ctx.state.datasets) {
      const trained = ds.status === "trained";
      const box = el("input", {
        type: "checkbox",
        value: ds.dataset_id,
        id: `ds-${ds.dataset_id}`,
        onchange: updateRunState,
      });
      if (!trained) box.disabled = true;
      const label = el(
        "label",
        { for: `ds-${ds.dataset_id}`, class: trained ? "dataset" : "dataset untrained" },
        box,
        ` ${ds.name} (${ds.status})`,
        trained ? null : el("em", { class: "hint" }, " — train first"),
      );
      datasetBoxes.append(el("div", {}, label));
    }
    updateRunState();
  };

  const run = async () => {
    error.textContent = "";
    progress.textContent = "";
    try {
      const submitted = await ctx.api.submitCompare(fileSelect.value, selectedDatasets(), {
        k: Number(kInput.value),
        highlight_threshold: Number(thresholdInput.value),
      });
      ctx.state.activeJob = { jobId: submitted.job_id, state: submitted.state };
      progress.textContent = `job ${submitted.job_id}: ${submitted.state}`;
      const status = await pollJob(ctx.api, submitted.job_id, {
        intervalMs: ctx.pollIntervalMs ?? 1000,
        onUpdate: (s) => {
          ctx.state.activeJob = { jobId: s.job_id, state: s.state };
          progress.textContent = `job ${s.job_id}: ${s.state}`;
        },
      });
      if (status.state === "failed") {
        error.textContent = status.error ?? "comparison failed";
        return;
      }
      ctx.navigate(`#/results/${status.job_id}`);
    } catch (e) {
      error.textContent = e instanceof ApiError ? e.detail : String(e);
    }
  };
  runButton.addEventListener("click", () => void run());
  fileSelect.addEventListener("change", updateRunState);

  root.append(
    el("h1", {}, "Comparison"),
    el("section", {}, el("h2", {}, "File"), fileSelect),
    el("section", {}, el("h2", {}, "Datasets"), datasetBoxes),
    el(
      "section",
      {},
      el("h2", {}, "Parameters"),
      el("label", {}, "top k ", kInput),
      el("label", {}, " similarity threshold ", thresholdInput),
    ),
    runButton,
    progress,
    error,
    el("p", {}, el("a", { href: "#/upload" }, "Back to uploads")),
  );
  void load().catch((e) => {
    error.textContent = e instanceof ApiError ? e.detail : String(e);
  });
}
