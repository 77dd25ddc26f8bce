"""Abnormal-profile detection: the per-cluster mean + 3 sigma distance rule.

A member is abnormal when its distance to the cluster centroid exceeds the
cluster's mean distance by at least three population standard deviations.
Zero-variance clusters flag nobody: with no spread there is no point that
"deviates so much as to arouse suspicion". Detection is followed by a
single removal pass and one re-clustering of the remaining profiles.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kshape import ClusterModel, TooFewProfiles, cluster
from .profiles import NormalizedProfile

SIGMA_MULTIPLIER = 3.0
#: clusters with population sigma at or below this flag nobody
EPS_VAR = 1e-12
#: slack on the eta >= 0 decision so exact-boundary cases survive rounding
ETA_TOL = 1e-12


@dataclass(frozen=True)
class ClusterThreshold:
    cluster: int
    size: int
    mean: float
    std: float
    threshold: float


@dataclass(frozen=True)
class FlaggedProfile:
    building_id: str
    cluster: int
    distance: float
    eta: float  # margin above the threshold, >= 0


@dataclass
class AnomalyReport:
    thresholds: list[ClusterThreshold]
    flagged: list[FlaggedProfile]

    def flagged_ids(self) -> set[str]:
        return {f.building_id for f in self.flagged}


def detect(model: ClusterModel) -> AnomalyReport:
    """Flag members whose centroid distance reaches mean + 3 sigma."""
    members = model.members()
    thresholds = []
    flagged = []
    for c in range(model.k):
        ids = members[c]
        dists = np.array([model.distances[b] for b in ids])
        mu = float(dists.mean())
        sigma = float(dists.std())
        th = mu + SIGMA_MULTIPLIER * sigma
        thresholds.append(ClusterThreshold(cluster=c, size=len(ids),
                                           mean=mu, std=sigma, threshold=th))
        if sigma <= EPS_VAR:
            continue
        for bid, d in zip(ids, dists):
            eta = float(d - th)
            if eta >= -ETA_TOL:
                flagged.append(FlaggedProfile(building_id=bid, cluster=c,
                                              distance=float(d),
                                              eta=max(eta, 0.0)))
    flagged.sort(key=lambda f: f.building_id)
    return AnomalyReport(thresholds=thresholds, flagged=flagged)


def remove_and_recluster(profiles: Sequence[NormalizedProfile],
                         report: AnomalyReport, k: int, seed: int,
                         max_iter: int = 100,
                         ) -> tuple[ClusterModel, AnomalyReport]:
    """Drop flagged profiles and re-run clustering with the same seed.

    Single removal pass: the second report returned is an audit over the
    final model, not input to further removal.
    """
    drop = report.flagged_ids()
    kept = [p for p in profiles if p.building_id not in drop]
    if len(kept) < k:
        raise TooFewProfiles(f"removal leaves {len(kept)} profiles for "
                             f"{k} clusters")
    final = cluster(kept, k, seed, max_iter)
    return final, detect(final)


def report_to_json_dict(report: AnomalyReport) -> dict:
    return {
        "sigma_multiplier": SIGMA_MULTIPLIER,
        "clusters": [
            {"cluster": t.cluster, "size": t.size, "mean": t.mean,
             "std": t.std, "threshold": t.threshold}
            for t in report.thresholds
        ],
        "flagged": [
            {"building_id": f.building_id, "cluster": f.cluster,
             "distance": f.distance, "eta": f.eta}
            for f in report.flagged
        ],
    }


def write_report_csv(path, report: AnomalyReport) -> None:
    """Flat triage export: ``building_id,cluster,distance,threshold,eta``."""
    th = {t.cluster: t.threshold for t in report.thresholds}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["building_id", "cluster", "distance", "threshold",
                         "eta"])
        for f in report.flagged:
            writer.writerow([f.building_id, f.cluster, repr(f.distance),
                             repr(th[f.cluster]), repr(f.eta)])
