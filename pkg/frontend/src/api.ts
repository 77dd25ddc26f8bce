/** Typed client for the artifact service; the viewer's only data path. */

import type {
  AnomalyJson,
  FlagsJson,
  LabelingJson,
  ManifestJson,
  ModelJson,
  ProfilesJson,
  SuggestionsJson,
  SweepJson,
} from "./types.js";

/** The labeling on the server was made against a different model. */
export class StaleSaveError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "StaleSaveError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.base}/api${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, `${path}: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  /** null instead of an error for endpoints that legitimately 404. */
  private async getOptional<T>(path: string): Promise<T | null> {
    try {
      return await this.getJson<T>(path);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }

  getManifest(): Promise<ManifestJson> {
    return this.getJson("/manifest");
  }

  getModel(which: "initial" | "final"): Promise<ModelJson> {
    return this.getJson(`/model/${which}`);
  }

  getProfiles(): Promise<ProfilesJson> {
    return this.getJson("/profiles");
  }

  getAnomaly(which: "initial" | "final"): Promise<AnomalyJson> {
    return this.getJson(`/anomaly/${which}`);
  }

  getSweep(): Promise<SweepJson | null> {
    return this.getOptional("/sweep");
  }

  getSuggestions(): Promise<SuggestionsJson> {
    return this.getJson("/suggestions");
  }

  getLabeling(): Promise<LabelingJson | null> {
    return this.getOptional("/labeling");
  }

  getFlags(): Promise<FlagsJson> {
    return this.getJson("/flags");
  }

  async putLabeling(labeling: LabelingJson): Promise<FlagsJson> {
    const response = await fetch(`${this.base}/api/labeling`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(labeling),
    });
    if (response.status === 409) {
      throw new StaleSaveError(
        "the model changed since this workspace was loaded"
      );
    }
    if (!response.ok) {
      throw new ApiError(response.status, `labeling save failed: HTTP ${response.status}`);
    }
    const body = (await response.json()) as { flags: FlagsJson };
    return body.flags;
  }
}
