// Scripted end-to-end review loop against a real, freshly seeded API
// server: list a day's clusters, shortlist one (persists across a
// reload), hit the 409 conflict path, then flag and confirm a source
// and see it in the exported blocklist. Skipped when the pipeline CLI
// is not installed.

import { execFileSync, spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, cpSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { mount, type App } from "../src/main.js";

const PORT = 8972;
const BASE = `http://127.0.0.1:${PORT}`;
const TOKEN = "live-test-token";
const DAY = "2024-06-21";
const FIXTURES = resolve(__dirname, "../../tests/fixtures");

const cliAvailable = spawnSync("episurv", ["--help"], { stdio: "ignore" }).status === 0;

let server: ChildProcess | null = null;
let workdir: string;

function cli(...args: string[]): string {
  return execFileSync("episurv", ["--config", join(workdir, "episurv.yaml"), ...args], {
    encoding: "utf-8",
    cwd: workdir,
  });
}

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/openapi.json`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("API server did not come up");
}

function seedStore(): void {
  workdir = mkdtempSync(join(tmpdir(), "episurv-ui-"));
  cpSync(join(FIXTURES, "corpus"), join(workdir, "corpus"), { recursive: true });
  for (const name of ["lexicon.csv", "gazetteer.csv", "synonyms.csv", "canonical_diseases.txt"]) {
    cpSync(join(FIXTURES, name), join(workdir, name));
  }
  writeFileSync(
    join(workdir, "episurv.yaml"),
    [
      "store: store",
      "reference:",
      "  lexicon: lexicon.csv",
      "  gazetteer: gazetteer.csv",
      "  synonyms: synonyms.csv",
      "  canonical_diseases: canonical_diseases.txt",
      "providers:",
      "  classifier: {kind: keyword}",
      "  translator: {kind: table, path: corpus/translations.json}",
      "  qa: {kind: pattern}",
      "  nli: {kind: overlap}",
      "  embedder: {kind: hashed-ngram}",
      "sources:",
      "  - {name: corpus, kind: url_list_file, path: corpus/articles.ndjson}",
      `api: {token: ${TOKEN}, port: ${PORT}}`,
      "",
    ].join("\n"),
  );
  cli("ingest", "--source", "corpus", "--blocklist", "corpus/blocklist.txt",
      "--now", "2024-06-22T12:00:00Z");
  cli("process", "--date", DAY);
  cli("cluster", "--date", DAY);
}

function freshApp(): App {
  document.body.innerHTML = '<main id="app"></main>';
  localStorage.clear();
  location.hash = "";
  return mount(window, BASE);
}

async function loginThroughForm(): Promise<void> {
  const form = document.querySelector<HTMLFormElement>(".login-form")!;
  (form.querySelector('[name="reviewer"]') as HTMLInputElement).value = "ncdc";
  (form.querySelector('[name="token"]') as HTMLInputElement).value = TOKEN;
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
  await vi.waitFor(() => {
    expect(document.querySelector(".login-form")).toBeNull();
  }, { timeout: 10_000 });
}

async function openDay(): Promise<void> {
  location.hash = `#/day/${DAY}`;
  await vi.waitFor(() => {
    expect(document.querySelectorAll("tbody tr").length).toBeGreaterThan(0);
  }, { timeout: 10_000 });
}

describe.skipIf(!cliAvailable)("review loop against a live seeded API", () => {
  beforeAll(async () => {
    seedStore();
    server = spawn("episurv", ["--config", join(workdir, "episurv.yaml"), "serve"], {
      stdio: "ignore",
    });
    await waitForServer();
  }, 90_000);

  afterAll(() => {
    server?.kill();
  });

  it("runs the full triage story", async () => {
    const app = freshApp();
    expect(app).toBeDefined();
    await loginThroughForm();
    await openDay();

    // the fixture day clusters exactly as frozen in the pipeline golden
    const rows = document.querySelectorAll<HTMLTableRowElement>("tbody tr");
    expect(rows.length).toBe(13);

    // shortlist the multi-member dengue cluster through its row button
    const target = Array.from(rows).find(
      (row) => row.querySelector(".members")!.textContent === "4",
    )!;
    const clusterId = target.dataset.cluster!;
    (target.querySelector("button.shortlist") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      const row = document.querySelector(`tr[data-cluster="${clusterId}"]`)!;
      expect(row.querySelector(".review .badge")!.textContent).toBe("shortlisted");
    }, { timeout: 10_000 });

    // a full reload reconstructs from the API: the decision persisted
    freshApp();
    await loginThroughForm();
    await openDay();
    const reloaded = document.querySelector(`tr[data-cluster="${clusterId}"]`)!;
    expect(reloaded.querySelector(".review .badge")!.textContent).toBe("shortlisted");

    // a conflicting decision surfaces the 409 path with the existing verdict
    (reloaded.querySelector("button.reject") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(document.querySelector(".notice")!.textContent).toContain("already decided");
    }, { timeout: 10_000 });
    expect(
      document
        .querySelector(`tr[data-cluster="${clusterId}"] .review .badge`)!
        .textContent,
    ).toBe("shortlisted");

    // open the cluster detail and flag one member's domain
    location.hash = `#/cluster/${clusterId}`;
    await vi.waitFor(() => {
      expect(document.querySelectorAll("article.member").length).toBe(4);
    }, { timeout: 10_000 });
    const flagButton = document.querySelector<HTMLButtonElement>(".flag-source")!;
    const domain = flagButton.dataset.domain!;
    flagButton.click();
    await vi.waitFor(() => {
      expect(document.querySelector(".badge.pending-flag")).not.toBeNull();
    }, { timeout: 10_000 });

    // unconfirmed flags stay out of the blocklist
    const api = new ApiClient(BASE, TOKEN);
    expect((await api.blocklist()).domains).not.toContain(domain);

    // confirming moves the domain into the exported blocklist
    document.querySelector<HTMLButtonElement>(".confirm-source")!.click();
    await vi.waitFor(() => {
      expect(document.querySelector(".badge.flagged")).not.toBeNull();
    }, { timeout: 10_000 });
    expect((await api.blocklist()).domains).toContain(domain);
  }, 110_000);
});
