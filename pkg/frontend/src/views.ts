/** View models: cluster cards, the label draft, and the anomaly gallery. */

import type {
  AnomalyJson,
  ClusterLabelJson,
  LabelingJson,
  ModelJson,
  ProfilesJson,
  Strategy,
  SuggestionsJson,
} from "./types.js";
import { STRATEGIES } from "./types.js";

export const MEMBER_OVERLAY_CAP = 150;

export interface MemberSeries {
  buildingId: string;
  seasons: number[][];
}

export interface ClusterView {
  cluster: number;
  seasonNames: string[];
  /** served centroid values, split per season, never rescaled */
  pattern: number[][];
  members: MemberSeries[];
  memberCount: number;
  sampledCount: number;
  sampleSeed: number;
  currentLabel: ClusterLabelJson | null;
  suggestion: { strategy: string; confidence: number };
}

/** Deterministic small PRNG so the displayed sample seed means something. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Sample up to `cap` items without replacement, stable for a seed. */
export function sampleCapped<T>(items: T[], cap: number, seed: number): T[] {
  if (items.length <= cap) return [...items];
  const rand = mulberry32(seed);
  const pool = [...items];
  for (let i = pool.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [pool[i], pool[j]] = [pool[j], pool[i]];
  }
  return pool.slice(0, cap);
}

export function splitSeasons(values: number[], nSeasons: number): number[][] {
  const width = values.length / nSeasons;
  const blocks: number[][] = [];
  for (let s = 0; s < nSeasons; s++) {
    blocks.push(values.slice(s * width, (s + 1) * width));
  }
  return blocks;
}

export function buildClusterViews(
  model: ModelJson,
  profiles: ProfilesJson,
  labeling: LabelingJson | null,
  suggestions: SuggestionsJson,
  sampleSeed = 1,
  cap = MEMBER_OVERLAY_CAP
): ClusterView[] {
  const normalizedById = new Map<string, number[]>();
  for (const entry of profiles.buildings) {
    if (entry.normalized) normalizedById.set(entry.building_id, entry.normalized);
  }
  const suggestionByCluster = new Map(
    suggestions.clusters.map((s) => [s.cluster, s])
  );
  const membersByCluster: string[][] = Array.from(
    { length: model.k },
    () => []
  );
  for (const bid of Object.keys(model.assignment).sort()) {
    membersByCluster[model.assignment[bid]].push(bid);
  }

  const views: ClusterView[] = [];
  for (let c = 0; c < model.k; c++) {
    const ids = membersByCluster[c];
    const sampled = sampleCapped(ids, cap, sampleSeed + c);
    const members: MemberSeries[] = [];
    for (const bid of sampled) {
      const z = normalizedById.get(bid);
      if (z) {
        members.push({
          buildingId: bid,
          seasons: splitSeasons(z, model.season_names.length),
        });
      }
    }
    const suggestion = suggestionByCluster.get(c);
    views.push({
      cluster: c,
      seasonNames: model.season_names,
      pattern: model.season_names.map((name) => model.centroids[c][name]),
      members,
      memberCount: ids.length,
      sampledCount: members.length,
      sampleSeed: sampleSeed + c,
      currentLabel: labeling ? labeling.clusters[String(c)] ?? null : null,
      suggestion: suggestion
        ? { strategy: suggestion.strategy, confidence: suggestion.confidence }
        : { strategy: "Unlabeled", confidence: 0 },
    });
  }
  return views;
}

export interface AnomalyCard {
  buildingId: string;
  cluster: number;
  distance: number;
  eta: number;
  profile: number[] | null;
}

export function buildAnomalyGallery(
  report: AnomalyJson,
  profiles: ProfilesJson
): AnomalyCard[] {
  const normalizedById = new Map<string, number[] | null>();
  for (const entry of profiles.buildings) {
    normalizedById.set(entry.building_id, entry.normalized);
  }
  return report.flagged.map((f) => ({
    buildingId: f.building_id,
    cluster: f.cluster,
    distance: f.distance,
    eta: f.eta,
    profile: normalizedById.get(f.building_id) ?? null,
  }));
}

/**
 * Pending strategy selections; saveable only when every cluster has an
 * explicit choice (Unlabeled counts, silence does not).
 */
export class LabelDraft {
  private selections = new Map<number, { strategy: Strategy; note?: string }>();

  constructor(
    public readonly k: number,
    public readonly fingerprint: string
  ) {}

  static fromLabeling(k: number, labeling: LabelingJson): LabelDraft {
    const draft = new LabelDraft(k, labeling.fingerprint);
    for (const [key, label] of Object.entries(labeling.clusters)) {
      draft.select(Number(key), label.strategy as Strategy, label.note);
    }
    return draft;
  }

  select(cluster: number, strategy: Strategy, note?: string): void {
    if (!STRATEGIES.includes(strategy)) {
      throw new Error(`unknown strategy ${strategy}`);
    }
    if (cluster < 0 || cluster >= this.k) {
      throw new Error(`cluster ${cluster} out of range`);
    }
    this.selections.set(cluster, { strategy, note });
  }

  setNote(cluster: number, note: string): void {
    const current = this.selections.get(cluster);
    if (current) current.note = note || undefined;
  }

  selection(cluster: number): { strategy: Strategy; note?: string } | null {
    return this.selections.get(cluster) ?? null;
  }

  isComplete(): boolean {
    for (let c = 0; c < this.k; c++) {
      if (!this.selections.has(c)) return false;
    }
    return true;
  }

  toLabelingJson(author: string): LabelingJson {
    if (!this.isComplete()) {
      throw new Error("every cluster needs a selection before saving");
    }
    const clusters: Record<string, ClusterLabelJson> = {};
    for (let c = 0; c < this.k; c++) {
      const { strategy, note } = this.selections.get(c)!;
      clusters[String(c)] = note ? { strategy, note } : { strategy };
    }
    return {
      fingerprint: this.fingerprint,
      author,
      timestamp: new Date().toISOString(),
      clusters,
    };
  }
}

export interface FunnelStep {
  label: string;
  count: number;
  detail: string;
}

export function buildFunnel(counts: {
  ingested: number;
  rejected_total: number;
  rejected: Record<string, number>;
  profiled: number;
  degenerate: number;
  clustered: number;
  abnormal: number;
  final_clustered: number;
}): FunnelStep[] {
  const rejectDetail = Object.entries(counts.rejected)
    .filter(([, n]) => n > 0)
    .map(([reason, n]) => `${reason} ${n}`)
    .join(", ");
  return [
    { label: "ingested", count: counts.ingested, detail: "" },
    {
      label: "profiled",
      count: counts.profiled,
      detail: rejectDetail
        ? `${counts.rejected_total} rejected: ${rejectDetail}`
        : "none rejected",
    },
    {
      label: "clustered",
      count: counts.clustered,
      detail:
        counts.degenerate > 0
          ? `${counts.degenerate} near-constant excluded`
          : "",
    },
    {
      label: "final patterns",
      count: counts.final_clustered,
      detail:
        counts.abnormal > 0
          ? `${counts.abnormal} abnormal removed`
          : "no abnormal profiles",
    },
  ];
}
