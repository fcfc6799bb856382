import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function stubFetch(status: number, body: unknown) {
  const fn = vi.fn(async () => new Response(JSON.stringify(body), { status }));
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("login stores the bearer token and later requests carry it", async () => {
    const fn = stubFetch(200, { token: "tok123", user_id: "user-000001" });
    const api = new ApiClient("");
    await api.login("u", "p");
    expect(api.token).toBe("tok123");

    stubFetch(200, { files: [] });
    await api.listFiles();
    const [, init] = (fetch as ReturnType<typeof vi.fn>).mock.calls[0]!;
    expect((init as RequestInit).headers).toMatchObject({ Authorization: "Bearer tok123" });
    expect(fn).toHaveBeenCalledOnce();
  });

  it("maps error bodies onto ApiError with the detail string", async () => {
    stubFetch(409, { detail: "username already exists" });
    const api = new ApiClient("");
    await expect(api.register("u", "p")).rejects.toThrowError(ApiError);
    await expect(api.register("u", "p")).rejects.toMatchObject({
      status: 409,
      detail: "username already exists",
    });
  });

  it("flattens structured validation details", async () => {
    stubFetch(422, { detail: [{ loc: ["body", "password"], msg: "too short" }] });
    const api = new ApiClient("");
    await expect(api.login("u", "p")).rejects.toMatchObject({ detail: "too short" });
  });

  it("submitCompare posts the job body", async () => {
    const fn = stubFetch(202, { job_id: "job-000001", state: "queued" });
    const api = new ApiClient("");
    api.token = "t";
    const out = await api.submitCompare("file-000001", ["dataset-000001"], { k: 10 });
    expect(out.job_id).toBe("job-000001");
    const [url, init] = fn.mock.calls[0]!;
    expect(url).toBe("/api/compare");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      file_id: "file-000001",
      dataset_ids: ["dataset-000001"],
      params: { k: 10 },
    });
  });
});
