/** Workbench wiring: load everything, render, label, save, refresh flags.
 *
 * The viewer reads only from the service and writes only the labeling,
 * only through the service's PUT endpoint. Saves carry the fingerprint of
 * the model the workspace was loaded against; a stale save is rejected by
 * the service and surfaces here as a prompt to reload.
 */

import { ApiClient, StaleSaveError } from "./api.js";
import {
  renderAnomalyCard,
  renderClusterCard,
  renderFunnel,
  renderSweepChart,
} from "./charts.js";
import type { FlagsJson, ModelJson, Strategy } from "./types.js";
import { STRATEGIES } from "./types.js";
import {
  buildAnomalyGallery,
  buildClusterViews,
  buildFunnel,
  LabelDraft,
} from "./views.js";

export interface Workspace {
  doc: Document;
  api: ApiClient;
  model: ModelJson;
  draft: LabelDraft;
}

function section(doc: Document, id: string): HTMLElement {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`missing #${id} container`);
  el.replaceChildren();
  return el;
}

function banner(doc: Document, kind: string, text: string,
                retry?: () => void): void {
  const host = doc.getElementById("banner");
  if (!host) return;
  host.replaceChildren();
  const box = doc.createElement("div");
  box.className = `banner banner-${kind}`;
  box.textContent = text;
  if (retry) {
    const button = doc.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", retry);
    box.appendChild(button);
  }
  host.appendChild(box);
}

function clearBanner(doc: Document): void {
  doc.getElementById("banner")?.replaceChildren();
}

function renderFlags(doc: Document, flags: FlagsJson): void {
  const host = section(doc, "flags");
  const heading = doc.createElement("h2");
  heading.textContent = "suitability flags";
  host.appendChild(heading);

  const counts = doc.createElement("p");
  counts.id = "flag-counts";
  const ruleText = Object.entries(flags.rule_counts)
    .map(([rule, n]) => `${rule}: ${n}`)
    .join(" · ");
  const verdictText = Object.entries(flags.verdict_counts)
    .map(([verdict, n]) => `${verdict}: ${n}`)
    .join(" · ");
  counts.textContent = `${flags.rows.length} buildings — ${verdictText}` +
    (ruleText ? ` — rules ${ruleText}` : "");
  host.appendChild(counts);

  const link = doc.createElement("a");
  link.href = "api/flags.csv";
  link.textContent = "full CSV export";
  host.appendChild(link);

  const table = doc.createElement("table");
  table.id = "flags-table";
  const head = doc.createElement("tr");
  for (const column of ["building", "category", "cluster", "strategy",
                        "verdict", "rule"]) {
    const th = doc.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of flags.rows) {
    const tr = doc.createElement("tr");
    tr.dataset.buildingId = row.building_id;
    tr.dataset.verdict = row.verdict;
    tr.dataset.rule = row.rule ?? "";
    for (const value of [row.building_id, row.category, String(row.cluster),
                         row.strategy, row.verdict, row.rule ?? ""]) {
      const td = doc.createElement("td");
      td.textContent = value;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  host.appendChild(table);
}

function labelControls(workspace: Workspace, cluster: number,
                       card: HTMLElement): void {
  const { doc, draft } = workspace;
  const controls = doc.createElement("div");
  controls.className = "label-controls";

  const select = doc.createElement("select");
  select.dataset.cluster = String(cluster);
  const placeholder = doc.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "— choose strategy —";
  select.appendChild(placeholder);
  for (const strategy of STRATEGIES) {
    const option = doc.createElement("option");
    option.value = strategy;
    option.textContent = strategy;
    select.appendChild(option);
  }
  const existing = draft.selection(cluster);
  if (existing) select.value = existing.strategy;
  select.addEventListener("change", () => {
    if (select.value) {
      draft.select(cluster, select.value as Strategy);
    }
    updateSaveState(workspace);
  });
  controls.appendChild(select);

  const note = doc.createElement("input");
  note.type = "text";
  note.placeholder = "note (optional)";
  note.dataset.cluster = String(cluster);
  if (existing?.note) note.value = existing.note;
  note.addEventListener("input", () => draft.setNote(cluster, note.value));
  controls.appendChild(note);

  card.appendChild(controls);
}

export function updateSaveState(workspace: Workspace): void {
  const button = workspace.doc.getElementById("save-labeling");
  if (button instanceof workspace.doc.defaultView!.HTMLButtonElement) {
    button.disabled = !workspace.draft.isComplete();
  } else if (button) {
    (button as HTMLButtonElement).disabled = !workspace.draft.isComplete();
  }
}

export async function assignAndSave(workspace: Workspace,
                                    author = "expert"): Promise<boolean> {
  const { doc, api, draft } = workspace;
  if (!draft.isComplete()) {
    banner(doc, "warn", "label every cluster (Unlabeled counts) before saving");
    return false;
  }
  try {
    const flags = await api.putLabeling(draft.toLabelingJson(author));
    renderFlags(doc, flags);
    banner(doc, "ok", "labeling saved; flags updated");
    return true;
  } catch (err) {
    if (err instanceof StaleSaveError) {
      banner(doc, "error",
             "stale workspace: the model changed on the server — reload " +
             "the workspace before saving",
             () => void loadWorkspace(doc, workspace.api));
      return false;
    }
    throw err;
  }
}

export async function loadWorkspace(doc: Document,
                                    api: ApiClient): Promise<Workspace | null> {
  clearBanner(doc);
  try {
    const [manifest, model, profiles, anomaly, suggestions, labeling, sweep,
           flags] = await Promise.all([
      api.getManifest(),
      api.getModel("final"),
      api.getProfiles(),
      api.getAnomaly("initial"),
      api.getSuggestions(),
      api.getLabeling(),
      api.getSweep(),
      api.getFlags(),
    ]);

    const draft = labeling
      ? LabelDraft.fromLabeling(model.k, labeling)
      : new LabelDraft(model.k, model.fingerprint);
    const workspace: Workspace = { doc, api, model, draft };

    const funnelHost = section(doc, "funnel");
    const funnelHeading = doc.createElement("h2");
    funnelHeading.textContent =
      `run funnel (k=${manifest.k_used}, seed ${manifest.seed_used})`;
    funnelHost.appendChild(funnelHeading);
    funnelHost.appendChild(renderFunnel(doc, buildFunnel(manifest.counts)));

    const sweepHost = section(doc, "sweep");
    if (sweep) {
      const sweepHeading = doc.createElement("h2");
      sweepHeading.textContent = "silhouette sweep";
      sweepHost.appendChild(sweepHeading);
      sweepHost.appendChild(renderSweepChart(doc, sweep));
    }

    const clustersHost = section(doc, "clusters");
    const clustersHeading = doc.createElement("h2");
    clustersHeading.textContent = "heat load patterns";
    clustersHost.appendChild(clustersHeading);
    for (const view of buildClusterViews(model, profiles, labeling,
                                         suggestions)) {
      const card = renderClusterCard(doc, view);
      labelControls(workspace, view.cluster, card);
      clustersHost.appendChild(card);
    }
    const save = doc.createElement("button");
    save.id = "save-labeling";
    save.textContent = "save labeling";
    save.addEventListener("click", () => void assignAndSave(workspace));
    clustersHost.appendChild(save);
    updateSaveState(workspace);

    const anomaliesHost = section(doc, "anomalies");
    const anomaliesHeading = doc.createElement("h2");
    const gallery = buildAnomalyGallery(anomaly, profiles);
    anomaliesHeading.textContent =
      `abnormal profiles (${gallery.length} removed before re-clustering)`;
    anomaliesHost.appendChild(anomaliesHeading);
    for (const card of gallery) {
      anomaliesHost.appendChild(renderAnomalyCard(doc, card));
    }

    renderFlags(doc, flags);
    return workspace;
  } catch (err) {
    banner(doc, "error",
           `cannot reach the artifact service: ${String(err)}`,
           () => void loadWorkspace(doc, api));
    return null;
  }
}

export function bootstrap(doc: Document, apiBase: string): void {
  void loadWorkspace(doc, new ApiClient(apiBase));
}
