"""End-to-end pipeline: raw CSV to patterns, anomalies, sweep, manifest.

Stage order is fixed: clean, extract profiles, z-normalize, cluster,
detect abnormal profiles, remove them, re-cluster, keep the final
centroids as the heat load patterns. A requested silhouette sweep runs
before the first clustering to pick k; the post-removal run reuses that k
and the same seed. All artifacts are plain JSON/CSV files in one output
directory, serialized so a rerun with the same config and seed reproduces
them byte for byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping

from . import __version__
from .anomaly import (AnomalyReport, detect, remove_and_recluster,
                      report_to_json_dict, write_report_csv)
from .errors import HeatPatternsError
from .kshape import ClusterModel, cluster, model_to_json_dict
from .meterdata import (DEFAULT_EPS_MAD, DEFAULT_WINDOW_HOURS, LONG_GAP_HOURS,
                        RejectReason, STUCK_RUN_HOURS, TOTAL_GAP_BUDGET_HOURS,
                        detect_jumps, read_building_metadata_csv,
                        read_readings_csv, repair, screen,
                        write_screening_csv)
from .profiles import (EPS_STD, PARTITIONS, DegenerateProfile, extract_profile,
                       normalize, profile_to_json_dict)
from .modelselect import (SilhouetteSweep, sweep, sweep_to_json_dict,
                          write_sweep_csv)
from .strategy import suggest_labels, suggestions_to_json_dict

log = logging.getLogger(__name__)


class ConfigError(HeatPatternsError):
    """Pipeline configuration is invalid."""


@dataclass
class PipelineConfig:
    """Everything a run needs; round-trips losslessly through JSON."""

    readings_csv: str
    output_dir: str
    metadata_csv: str | None = None
    partition: str = "four_season"
    k: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    seed: int = 0
    max_iter: int = 100
    restarts: int = 1
    window_hours: int = DEFAULT_WINDOW_HOURS
    eps_mad: float = DEFAULT_EPS_MAD
    long_gap_hours: int = LONG_GAP_HOURS
    total_gap_budget_hours: int = TOTAL_GAP_BUDGET_HOURS
    stuck_run_hours: int = STUCK_RUN_HOURS
    eps_std: float = EPS_STD

    def validate(self) -> None:
        if self.partition not in PARTITIONS:
            raise ConfigError(f"unknown partition {self.partition!r}; "
                              f"choose from {sorted(PARTITIONS)}")
        sweep_given = self.k_min is not None or self.k_max is not None
        if self.k is None and not sweep_given:
            raise ConfigError("either k or a sweep range k_min..k_max "
                              "is required")
        if self.k is not None and sweep_given:
            raise ConfigError("give k or a sweep range, not both")
        if sweep_given:
            if self.k_min is None or self.k_max is None:
                raise ConfigError("sweep needs both k_min and k_max")
            if not 2 <= self.k_min <= self.k_max:
                raise ConfigError("sweep range must satisfy "
                                  "2 <= k_min <= k_max")
        elif self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.window_hours < 3 or self.window_hours % 2 == 0:
            raise ConfigError("window_hours must be an odd integer >= 3")
        for name in ("eps_mad", "eps_std"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("long_gap_hours", "total_gap_budget_hours",
                     "stuck_run_hours"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "readings_csv" not in doc or "output_dir" not in doc:
            raise ConfigError("config needs readings_csv and output_dir")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_json_dict(doc)


@dataclass
class StageCounts:
    ingested: int = 0
    rejected: dict[str, int] = field(default_factory=lambda: {
        reason.value: 0 for reason in RejectReason})
    profiled: int = 0
    degenerate: int = 0
    clustered: int = 0
    abnormal: int = 0
    final_clustered: int = 0

    @property
    def rejected_total(self) -> int:
        return sum(self.rejected.values())

    def validate(self) -> None:
        if self.ingested != self.rejected_total + self.profiled:
            raise HeatPatternsError("manifest identity violated: ingested "
                                    "!= rejected + profiled")
        if self.profiled != self.degenerate + self.clustered:
            raise HeatPatternsError("manifest identity violated: profiled "
                                    "!= degenerate + clustered")
        if self.clustered != self.abnormal + self.final_clustered:
            raise HeatPatternsError("manifest identity violated: clustered "
                                    "!= abnormal + final")


@dataclass
class RunManifest:
    config: dict
    counts: StageCounts
    k_used: int
    seed_used: int
    recommended_k: int | None
    initial_model_fingerprint: str
    final_model_fingerprint: str
    tool_version: str = __version__

    def to_json_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config": self.config,
            "counts": {
                "ingested": self.counts.ingested,
                "rejected": {r.value: self.counts.rejected[r.value]
                             for r in RejectReason},
                "rejected_total": self.counts.rejected_total,
                "profiled": self.counts.profiled,
                "degenerate": self.counts.degenerate,
                "clustered": self.counts.clustered,
                "abnormal": self.counts.abnormal,
                "final_clustered": self.counts.final_clustered,
            },
            "k_used": self.k_used,
            "seed_used": self.seed_used,
            "recommended_k": self.recommended_k,
            "fingerprints": {
                "initial_model": self.initial_model_fingerprint,
                "final_model": self.final_model_fingerprint,
            },
        }


def write_json(path, doc) -> None:
    """Deterministic JSON artifact writer (plain dump, trailing newline)."""
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


@dataclass
class RunArtifacts:
    """In-memory handles to what ``run`` computed, for callers and tests."""

    manifest: RunManifest
    initial_model: ClusterModel
    final_model: ClusterModel
    initial_report: AnomalyReport
    final_report: AnomalyReport
    sweep_result: SilhouetteSweep | None


@dataclass
class PreparedInput:
    """Output of the cleaning and profiling stages."""

    series_list: list
    verdicts: list
    profile_docs: list
    normalized: list
    counts: StageCounts


def prepare_input(config: PipelineConfig) -> PreparedInput:
    """Ingest, screen, repair, and profile; shared by run and sweep."""
    partition = PARTITIONS[config.partition]
    log.info("ingesting %s", config.readings_csv)
    metadata = (read_building_metadata_csv(config.metadata_csv)
                if config.metadata_csv else None)
    series_list = read_readings_csv(config.readings_csv, metadata)
    counts = StageCounts(ingested=len(series_list))

    verdicts = []
    cleaned = []
    for series in series_list:
        verdict = screen(series,
                         long_gap_hours=config.long_gap_hours,
                         total_gap_budget_hours=config.total_gap_budget_hours,
                         stuck_run_hours=config.stuck_run_hours)
        if verdict.accepted:
            jumps = detect_jumps(series, config.window_hours, config.eps_mad)
            repaired, n_repaired = repair(series, jumps)
            verdict = replace(verdict, repaired_count=n_repaired)
            cleaned.append(repaired)
        else:
            counts.rejected[verdict.reason.value] += 1
        verdicts.append((series.building_id, verdict))
    counts.profiled = len(cleaned)
    log.info("screening kept %d of %d buildings", counts.profiled,
             counts.ingested)

    profile_docs = []
    normalized = []
    for series in cleaned:
        profile = extract_profile(series, partition)
        try:
            norm = normalize(profile, partition, config.eps_std)
            normalized.append(norm)
        except DegenerateProfile as exc:
            log.warning("excluded from clustering: %s", exc)
            counts.degenerate += 1
            norm = None
        profile_docs.append(profile_to_json_dict(profile, norm, partition))
    counts.clustered = len(normalized)
    return PreparedInput(series_list=series_list, verdicts=verdicts,
                         profile_docs=profile_docs, normalized=normalized,
                         counts=counts)


def run(config: PipelineConfig) -> RunArtifacts:
    """Execute the whole discovery pipeline and write the artifact store."""
    config.validate()
    partition = PARTITIONS[config.partition]
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    prepared = prepare_input(config)
    series_list = prepared.series_list
    verdicts = prepared.verdicts
    profile_docs = prepared.profile_docs
    normalized = prepared.normalized
    counts = prepared.counts

    sweep_result = None
    recommended_k = None
    if config.k is not None:
        k_used, seed_used = config.k, config.seed
    else:
        log.info("sweeping k in [%d, %d]", config.k_min, config.k_max)
        sweep_result = sweep(normalized, config.k_min, config.k_max,
                             config.seed, config.max_iter,
                             restarts=config.restarts)
        recommended_k = sweep_result.recommended_k
        chosen = next(r for r in sweep_result.rows
                      if r.k == sweep_result.recommended_k)
        k_used, seed_used = chosen.k, chosen.seed_used

    log.info("clustering %d profiles at k=%d", counts.clustered, k_used)
    initial_model = cluster(normalized, k_used, seed_used, config.max_iter)
    initial_report = detect(initial_model)
    counts.abnormal = len(initial_report.flagged)
    log.info("flagged %d abnormal profiles", counts.abnormal)

    final_model, final_report = remove_and_recluster(
        normalized, initial_report, k_used, seed_used, config.max_iter)
    counts.final_clustered = len(final_model.assignment)
    counts.validate()

    suggestions = suggest_labels(final_model, partition)

    manifest = RunManifest(
        config=config.to_json_dict(),
        counts=counts,
        k_used=k_used,
        seed_used=seed_used,
        recommended_k=recommended_k,
        initial_model_fingerprint=initial_model.fingerprint(),
        final_model_fingerprint=final_model.fingerprint(),
    )

    write_json(out_dir / "config.json", config.to_json_dict())
    write_screening_csv(out_dir / "screening.csv", verdicts)
    _write_buildings_csv(out_dir / "buildings.csv", series_list)
    write_json(out_dir / "profiles.json",
               {"partition": partition.name, "buildings": profile_docs})
    if sweep_result is not None:
        write_sweep_csv(out_dir / "sweep.csv", sweep_result)
        write_json(out_dir / "sweep.json", sweep_to_json_dict(sweep_result))
    write_json(out_dir / "model_initial.json",
               model_to_json_dict(initial_model, partition))
    write_json(out_dir / "model_final.json",
               model_to_json_dict(final_model, partition))
    write_json(out_dir / "anomaly_initial.json",
               report_to_json_dict(initial_report))
    write_report_csv(out_dir / "anomaly_initial.csv", initial_report)
    write_json(out_dir / "anomaly_final.json",
               report_to_json_dict(final_report))
    write_report_csv(out_dir / "anomaly_final.csv", final_report)
    write_json(out_dir / "suggestions.json",
               suggestions_to_json_dict(suggestions))
    write_json(out_dir / "manifest.json", manifest.to_json_dict())
    log.info("artifact store written to %s", out_dir)

    return RunArtifacts(manifest=manifest,
                        initial_model=initial_model,
                        final_model=final_model,
                        initial_report=initial_report,
                        final_report=final_report,
                        sweep_result=sweep_result)


def _write_buildings_csv(path, series_list) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["building_id", "category"])
        for series in series_list:
            writer.writerow([series.building_id, series.category.value])
