// @vitest-environment jsdom
//
// Drives the real artifact service: generates a four-archetype fixture,
// runs the pipeline, boots the service, and exercises the workbench
// against it end to end.
import { execSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { assignAndSave, loadWorkspace, type Workspace } from "../src/app.js";
import { LabelDraft } from "../src/views.js";

const PORT = 8733;
const BASE = `http://127.0.0.1:${PORT}`;

let workdir: string;
let service: ChildProcess;

function scaffold(): void {
  document.body.innerHTML = `
    <div id="banner"></div>
    <section id="funnel"></section>
    <section id="sweep"></section>
    <section id="clusters"></section>
    <section id="anomalies"></section>
    <section id="flags"></section>`;
}

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 60; attempt++) {
    try {
      const response = await fetch(`${BASE}/api/manifest`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error("artifact service never became reachable");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "viewer-e2e-"));
  execSync(
    `heatpatterns generate --out ${workdir}/data ` +
      `--mix "COC=25,NSB=25,TCO5=25,TCO7=25" --noise 0.1 ` +
      `--faults "scramble=3" --seed 11`,
    { stdio: "pipe" }
  );
  execSync(
    `heatpatterns run --readings ${workdir}/data/readings.csv ` +
      `--out ${workdir}/artifacts --k 4 --seed 7`,
    { stdio: "pipe" }
  );
  service = spawn(
    "heatpatterns",
    ["serve", "--artifacts", `${workdir}/artifacts`, "--port", String(PORT)],
    { stdio: "ignore" }
  );
  await waitForService();
}, 120_000);

afterAll(() => {
  service?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

async function freshWorkspace(): Promise<Workspace> {
  scaffold();
  const workspace = await loadWorkspace(document, new ApiClient(BASE));
  expect(workspace).not.toBeNull();
  return workspace!;
}

describe("workbench against the live fixture service", () => {
  it("renders four cluster views, pattern opaque over translucent members",
     async () => {
    await freshWorkspace();
    const cards = document.querySelectorAll(".cluster-card");
    expect(cards).toHaveLength(4);
    for (const card of cards) {
      const svg = card.querySelector(".season-panel svg")!;
      const pattern = svg.querySelector("polyline.pattern")!;
      expect(pattern.getAttribute("stroke-opacity")).toBe("1");
      const members = svg.querySelectorAll("polyline.member");
      expect(members.length).toBeGreaterThan(0);
      for (const member of members) {
        expect(Number(member.getAttribute("stroke-opacity"))).toBeLessThan(
          0.2);
      }
      expect(
        card.querySelectorAll(".season-panel")).toHaveLength(4);
    }
  });

  it("renders exactly the served centroid values", async () => {
    const workspace = await freshWorkspace();
    const model = workspace.model;
    for (const card of document.querySelectorAll<HTMLElement>(
         ".cluster-card")) {
      const c = Number(card.dataset.cluster);
      const rendered = JSON.parse(card.dataset.patternValues!);
      const served = model.season_names.map(
        (name) => model.centroids[c][name]);
      expect(rendered).toEqual(served);
    }
  });

  it("anomaly gallery count equals the flagged count", async () => {
    await freshWorkspace();
    const report = await (await fetch(`${BASE}/api/anomaly/initial`)).json();
    expect(document.querySelectorAll(".anomaly-card")).toHaveLength(
      report.flagged.length);
    expect(report.flagged.length).toBeGreaterThan(0);
  });

  it("starts with every cluster unlabeled and the save disabled", async () => {
    await freshWorkspace();
    const save = document.getElementById(
      "save-labeling") as HTMLButtonElement;
    expect(save.disabled).toBe(true);
    const flagCounts = document.getElementById("flag-counts")!;
    expect(flagCounts.textContent).toContain("Unknown");
  });

  it("saving an NSB label flags every member of that cluster R3",
     async () => {
    const workspace = await freshWorkspace();

    // pick strategies through the DOM controls, NSB on cluster 0
    const selects = document.querySelectorAll<HTMLSelectElement>(
      ".label-controls select");
    expect(selects).toHaveLength(4);
    for (const select of selects) {
      const cluster = Number(select.dataset.cluster);
      select.value = cluster === 0 ? "NSB" : "COC";
      select.dispatchEvent(new Event("change"));
    }
    const save = document.getElementById(
      "save-labeling") as HTMLButtonElement;
    expect(save.disabled).toBe(false);

    const saved = await assignAndSave(workspace);
    expect(saved).toBe(true);

    const clusterZero = Object.entries(workspace.model.assignment)
      .filter(([, c]) => c === 0)
      .map(([bid]) => bid);
    expect(clusterZero.length).toBeGreaterThan(0);
    const rows = document.querySelectorAll<HTMLElement>(
      "#flags-table tr[data-building-id]");
    const byId = new Map(
      [...rows].map((row) => [row.dataset.buildingId!, row]));
    for (const bid of clusterZero) {
      expect(byId.get(bid)!.dataset.verdict).toBe("Unsuitable");
      expect(byId.get(bid)!.dataset.rule).toBe("R3");
    }

    // displayed flag count equals the CSV export's row count
    const csv = await (await fetch(`${BASE}/api/flags.csv`)).text();
    const csvRows = csv.trim().split("\n").length - 1;
    expect(rows).toHaveLength(csvRows);
  });

  it("rejects a stale-fingerprint save and prompts a reload", async () => {
    const workspace = await freshWorkspace();
    const stale: Workspace = {
      ...workspace,
      draft: new LabelDraft(workspace.model.k, "0".repeat(64)),
    };
    for (let c = 0; c < workspace.model.k; c++) {
      stale.draft.select(c, "COC");
    }
    const saved = await assignAndSave(stale);
    expect(saved).toBe(false);
    const banner = document.querySelector(".banner-error")!;
    expect(banner.textContent).toContain("stale");
    expect(banner.querySelector("button")).not.toBeNull();
    // the server kept the earlier labeling
    const labeling = await (await fetch(`${BASE}/api/labeling`)).json();
    expect(labeling.clusters["0"].strategy).toBe("NSB");
  });

  it("shows an error banner with retry when the service is unreachable",
     async () => {
    scaffold();
    const workspace = await loadWorkspace(
      document, new ApiClient("http://127.0.0.1:1"));
    expect(workspace).toBeNull();
    const banner = document.querySelector(".banner-error")!;
    expect(banner.textContent).toContain("cannot reach");
    expect(banner.querySelector("button")).not.toBeNull();
  });
});
