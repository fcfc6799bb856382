import { ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import { AppContext } from "../context.js";

async function refreshLists(ctx: AppContext, uploadsList: HTMLElement, datasetsList: HTMLElement) {
  ctx.state.uploads = await ctx.api.listFiles();
  ctx.state.datasets = await ctx.api.listDatasets();
  clear(uploadsList);
  for (const file of ctx.state.uploads) {
    uploadsList.append(el("li", { class: "upload-row" }, `${file.filename} (${file.file_id})`));
  }
  clear(datasetsList);
  for (const ds of ctx.state.datasets) {
    datasetsList.append(
      el(
        "li",
        { class: "dataset-row" },
        `${ds.name} — ${ds.status}, ${ds.documents} documents` +
          (ds.failures ? `, ${ds.failures} fetch failures` : ""),
      ),
    );
  }
}

export function renderUpload(root: HTMLElement, ctx: AppContext): void {
  if (!ctx.state.session) {
    ctx.navigate("#/login");
    return;
  }
  clear(root);
  const fileError = el("p", { class: "error", id: "file-error" });
  const fileStatus = el("p", { class: "status", id: "file-status" });
  const datasetError = el("p", { class: "error", id: "dataset-error" });
  const datasetStatus = el("div", { class: "status", id: "dataset-status" });
  const uploadsList = el("ul", { id: "uploads" });
  const datasetsList = el("ul", { id: "datasets" });

  const fileInput = el("input", { id: "file-input", type: "file" });
  const uploadFile = async () => {
    fileError.textContent = "";
    const file = fileInput.files?.[0];
    if (!file) {
      fileError.textContent = "choose a file first";
      return;
    }
    try {
      const out = await ctx.api.uploadFile(file);
      fileStatus.textContent = `uploaded ${out.filename} as ${out.file_id}`;
      await refreshLists(ctx, uploadsList, datasetsList);
    } catch (e) {
      fileError.textContent = e instanceof ApiError ? e.detail : String(e);
    }
  };

  const nameInput = el("input", { id: "dataset-name", placeholder: "dataset name" });
  const csvInput = el("input", { id: "csv-input", type: "file" });
  const uploadDataset = async () => {
    datasetError.textContent = "";
    clear(datasetStatus);
    const csv = csvInput.files?.[0];
    if (!csv || !nameInput.value) {
      datasetError.textContent = "need a dataset name and a CSV file";
      return;
    }
    try {
      const out = await ctx.api.uploadDataset(nameInput.value, csv);
      datasetStatus.append(
        el(
          "p",
          {},
          `dataset ${out.name} (${out.dataset_id}): ${out.status}, ${out.documents} documents`,
        ),
      );
      const problems = [...out.row_errors, ...out.fetch_failures];
      if (problems.length) {
        const list = el("ul", { class: "ingest-failures" });
        for (const [row, message] of problems) {
          list.append(el("li", {}, `row ${row}: ${message}`));
        }
        datasetStatus.append(el("p", {}, "rows with problems:"), list);
      }
      await refreshLists(ctx, uploadsList, datasetsList);
    } catch (e) {
      datasetError.textContent = e instanceof ApiError ? e.detail : String(e);
    }
  };

  root.append(
    el("h1", {}, "Upload"),
    el("section", {},
      el("h2", {}, "Upload Files"),
      fileInput,
      el("button", { id: "upload-file", onclick: () => void uploadFile() }, "Upload Files"),
      fileStatus,
      fileError,
    ),
    el("section", {},
      el("h2", {}, "Upload Datasets"),
      nameInput,
      csvInput,
      el("button", { id: "upload-dataset", onclick: () => void uploadDataset() }, "Upload Datasets"),
      datasetStatus,
      datasetError,
    ),
    el("section", {},
      el("h2", {}, "Your uploads"),
      uploadsList,
      el("h2", {}, "Your datasets"),
      datasetsList,
    ),
    el("p", {}, el("a", { href: "#/compare", id: "to-compare" }, "Go to comparison")),
  );
  void refreshLists(ctx, uploadsList, datasetsList).catch(() => undefined);
}
