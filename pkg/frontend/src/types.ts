/** JSON shapes served by the heatpatterns artifact service. */

export interface ManifestJson {
  tool_version: string;
  config: Record<string, unknown>;
  counts: {
    ingested: number;
    rejected: Record<string, number>;
    rejected_total: number;
    profiled: number;
    degenerate: number;
    clustered: number;
    abnormal: number;
    final_clustered: number;
  };
  k_used: number;
  seed_used: number;
  recommended_k: number | null;
  fingerprints: { initial_model: string; final_model: string };
}

export interface ModelJson {
  k: number;
  seed: number;
  iterations_run: number;
  fingerprint: string;
  partition: string;
  season_names: string[];
  centroids: Record<string, number[]>[];
  assignment: Record<string, number>;
  distances: Record<string, number>;
  objective_history: number[];
}

export interface ProfileEntry {
  building_id: string;
  seasons: Record<string, number[]>;
  weeks_used: Record<string, number>;
  normalized: number[] | null;
}

export interface ProfilesJson {
  partition: string;
  buildings: ProfileEntry[];
}

export interface AnomalyJson {
  sigma_multiplier: number;
  clusters: {
    cluster: number;
    size: number;
    mean: number;
    std: number;
    threshold: number;
  }[];
  flagged: {
    building_id: string;
    cluster: number;
    distance: number;
    eta: number;
  }[];
}

export interface SweepJson {
  recommended_k: number;
  rows: {
    k: number;
    mean_silhouette: number;
    iterations: number;
    seed_used: number;
    quality: string;
  }[];
}

export interface SuggestionsJson {
  clusters: { cluster: number; strategy: string; confidence: number }[];
}

export interface ClusterLabelJson {
  strategy: string;
  variant?: string;
  note?: string;
}

export interface LabelingJson {
  fingerprint: string;
  author: string;
  timestamp: string;
  clusters: Record<string, ClusterLabelJson>;
}

export interface FlagRow {
  building_id: string;
  category: string;
  cluster: number;
  strategy: string;
  verdict: string;
  rule: string | null;
}

export interface FlagsJson {
  fingerprint: string;
  rows: FlagRow[];
  rule_counts: Record<string, number>;
  verdict_counts: Record<string, number>;
}

export const STRATEGIES = ["COC", "NSB", "TCO5", "TCO7", "Unlabeled"] as const;
export type Strategy = (typeof STRATEGIES)[number];
