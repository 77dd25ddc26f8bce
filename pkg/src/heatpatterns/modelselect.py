"""Internal cluster validation: mean silhouette under shape-based distance.

The silhouette of a profile compares its mean distance to co-members with
the mean distance to the nearest other cluster; the mean over all profiles
scores a whole model. Sweeping k and taking the argmax picks the cluster
count. Pairwise distances use the same sbd kernel as the clustering and
can be computed once and shared across a sweep.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HeatPatternsError
from .kshape import ClusterModel, cluster
from .profiles import NormalizedProfile
from .sbd import pairwise_distances

log = logging.getLogger(__name__)


class SilhouetteUndefined(HeatPatternsError):
    """Silhouette needs at least two clusters."""


@dataclass(frozen=True)
class SweepRow:
    k: int
    mean_silhouette: float
    iterations_run: int
    seed_used: int
    quality: str


@dataclass
class SilhouetteSweep:
    rows: list[SweepRow]
    recommended_k: int


def _quality_label(score: float) -> str:
    # advisory reading of the score, not a gate
    if score > 0.7:
        return "excellent"
    if score >= 0.5:
        return "reasonable"
    if score >= 0.25:
        return "weak"
    return "poor"


def mean_silhouette(model: ClusterModel,
                    profiles: Sequence[NormalizedProfile],
                    pairwise: np.ndarray | None = None) -> float:
    """Mean silhouette of the model over its profiles.

    The own-cluster term is the mean distance over the whole cluster (the
    zero self-distance included), which makes the score invariant under
    duplicating every profile. Lone members of singleton clusters score 0,
    as does a profile whose own and nearest-other means are both zero.
    """
    if model.k < 2:
        raise SilhouetteUndefined("need k >= 2 for a silhouette")
    ids = [p.building_id for p in profiles]
    labels = np.array([model.assignment[bid] for bid in ids])
    if pairwise is None:
        pairwise = pairwise_distances(np.stack([p.z for p in profiles]))
    n = len(ids)
    onehot = np.zeros((n, model.k))
    onehot[np.arange(n), labels] = 1.0
    sums = pairwise @ onehot                      # (n, k) distance sums
    sizes = onehot.sum(axis=0)                    # members per cluster

    own_size = sizes[labels]
    a = sums[np.arange(n), labels] / own_size
    other_means = sums / sizes[np.newaxis, :]
    other_means[np.arange(n), labels] = np.inf
    b = other_means.min(axis=1)

    top = np.maximum(a, b)
    s = np.where(top > 0.0, (b - a) / np.where(top > 0.0, top, 1.0), 0.0)
    s = np.where(own_size == 1, 0.0, s)
    return float(s.mean())


def sweep(profiles: Sequence[NormalizedProfile], k_min: int, k_max: int,
          seed: int, max_iter: int = 100, *, restarts: int = 1,
          pairwise: np.ndarray | None = None) -> SilhouetteSweep:
    """Cluster at every k in [k_min, k_max] and score each model.

    One run per k with the shared seed by default; with ``restarts`` > 1
    each k runs at seeds ``seed .. seed + restarts - 1`` and keeps the
    best-silhouette run. Recommends the k with the highest mean
    silhouette, ties to the smallest k.
    """
    n = len(profiles)
    if not 2 <= k_min <= k_max <= n - 1:
        raise ValueError(f"need 2 <= k_min <= k_max <= {n - 1}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if pairwise is None:
        pairwise = pairwise_distances(np.stack([p.z for p in profiles]))

    rows = []
    for k in range(k_min, k_max + 1):
        best: SweepRow | None = None
        for r in range(restarts):
            model = cluster(profiles, k, seed + r, max_iter)
            score = mean_silhouette(model, profiles, pairwise=pairwise)
            row = SweepRow(k=k, mean_silhouette=score,
                           iterations_run=model.iterations_run,
                           seed_used=seed + r,
                           quality=_quality_label(score))
            if best is None or row.mean_silhouette > best.mean_silhouette:
                best = row
        rows.append(best)
        log.info("sweep k=%d silhouette=%.4f (%s)", k,
                 best.mean_silhouette, best.quality)

    winner = max(rows, key=lambda r: (r.mean_silhouette, -r.k))
    return SilhouetteSweep(rows=rows, recommended_k=winner.k)


def sweep_to_json_dict(result: SilhouetteSweep) -> dict:
    return {
        "recommended_k": result.recommended_k,
        "rows": [
            {"k": r.k, "mean_silhouette": r.mean_silhouette,
             "iterations": r.iterations_run, "seed_used": r.seed_used,
             "quality": r.quality}
            for r in result.rows
        ],
    }


def write_sweep_csv(path, result: SilhouetteSweep) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mean_silhouette", "iterations"])
        for r in result.rows:
            writer.writerow([r.k, repr(r.mean_silhouette), r.iterations_run])
