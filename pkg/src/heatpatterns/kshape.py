"""k-shape partitional clustering of normalized heat load profiles.

Iterative refinement alternating two steps: every cluster centroid is
recomputed by shape extraction (the dominant eigenvector of the centered
Gram matrix of members aligned to the previous centroid), then every
profile is reassigned to its nearest centroid under shape-based distance.
Initial labels are uniform-random from an explicit seed, so any run is
reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import HeatPatternsError
from .profiles import NormalizedProfile, SeasonPartition, deconcatenate
from .sbd import RowSpectra, align

log = logging.getLogger(__name__)

POWER_ITER_TOL = 1e-8
POWER_ITER_CAP = 1000


class DegenerateCluster(HeatPatternsError):
    """Aligned cluster members carry no shape information."""


class TooFewProfiles(HeatPatternsError):
    """Fewer profiles than requested clusters."""


@dataclass
class ClusterModel:
    """Result of one k-shape run.

    ``centroids`` rows are z-normalized; they are the heat load patterns.
    ``distances[b]`` is the shape-based distance of building ``b`` to the
    centroid of its assigned cluster, recomputable from the stored data.
    """

    k: int
    centroids: np.ndarray  # (k, m)
    assignment: dict[str, int]
    distances: dict[str, float]
    iterations_run: int
    seed: int
    objective_history: list[float] = field(default_factory=list)

    def members(self) -> list[list[str]]:
        """Building ids per cluster, sorted for determinism."""
        out: list[list[str]] = [[] for _ in range(self.k)]
        for bid in sorted(self.assignment):
            out[self.assignment[bid]].append(bid)
        return out

    def fingerprint(self) -> str:
        """Content hash of the centroids at 1e-9 precision.

        Robust against cosmetic re-serialization; any real change to a
        pattern invalidates labelings made against the old model.
        """
        rounded = np.round(np.asarray(self.centroids, dtype=np.float64), 9)
        rounded = rounded + 0.0  # collapse -0.0 into +0.0
        digest = hashlib.sha256()
        digest.update(f"{self.centroids.shape[0]}x"
                      f"{self.centroids.shape[1]}:".encode())
        digest.update(np.ascontiguousarray(rounded, dtype="<f8").tobytes())
        return digest.hexdigest()


def _znorm(v: np.ndarray) -> np.ndarray:
    std = v.std()
    if std == 0.0:
        raise DegenerateCluster("extracted shape is constant")
    return (v - v.mean()) / std


def _centered_ramp(m: int) -> np.ndarray:
    v = np.arange(m, dtype=np.float64)
    v -= v.mean()
    return v / np.linalg.norm(v)


def shape_extract(members, previous_centroid, *,
                  tol: float = POWER_ITER_TOL,
                  max_iter: int = POWER_ITER_CAP) -> np.ndarray:
    """Centroid maximizing the summed squared NCC to the aligned members.

    Members are shifted to best align with ``previous_centroid`` (skipped
    when it is all zeros, as on the first refinement pass), each aligned
    row is mean-centered, and the dominant eigenvector of the resulting
    Gram matrix is found by power iteration on the implicit product
    ``Z^T (Z v)``. The sign is chosen so the result correlates
    non-negatively with the previous centroid; the output is z-normalized.
    """
    mat = np.asarray(members, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[np.newaxis, :]
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ValueError("members must be a non-empty set of equal-length "
                         "vectors")
    prev = np.asarray(previous_centroid, dtype=np.float64)
    if prev.shape != (mat.shape[1],):
        raise ValueError("previous_centroid length must match the members")

    m = mat.shape[1]
    have_reference = float(np.linalg.norm(prev)) > 0.0
    if have_reference:
        spectra = RowSpectra(mat)
        _, shifts = spectra.ncc_max_reversed(prev)
        aligned = np.stack([align(mat[i], int(shifts[i]))
                            for i in range(mat.shape[0])])
    else:
        aligned = mat.copy()

    z = aligned - aligned.mean(axis=1, keepdims=True)
    if not np.any(np.abs(z) > 1e-12):
        raise DegenerateCluster("aligned members are all constant")

    if have_reference:
        v = prev - prev.mean()
        norm = np.linalg.norm(v)
        v = v / norm if norm > 1e-12 else _centered_ramp(m)
    else:
        v = _centered_ramp(m)

    restarted = False
    for _ in range(max_iter):
        w = z.T @ (z @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # start vector fell in the kernel; retry once from the ramp
            if restarted:
                raise DegenerateCluster("power iteration collapsed to zero")
            v, restarted = _centered_ramp(m), True
            continue
        w /= norm
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            break

    reference = prev if have_reference else None
    if reference is not None:
        if float(v @ reference) < 0.0:
            v = -v
    elif v[int(np.argmax(np.abs(v)))] < 0.0:
        v = -v
    return _znorm(v)


def _fill_initial_empties(labels: np.ndarray, k: int,
                          ids: Sequence[str]) -> None:
    """Donate from the largest cluster until no initial cluster is empty.

    No centroids exist yet, so the donor is the largest cluster's
    lexicographically last member; deterministic and order-independent.
    """
    counts = np.bincount(labels, minlength=k)
    for empty in range(k):
        while counts[empty] == 0:
            donor_cluster = int(np.argmax(counts))
            if counts[donor_cluster] < 2:
                raise TooFewProfiles("cannot populate every cluster")
            donor = max(np.flatnonzero(labels == donor_cluster),
                        key=lambda i: ids[i])
            labels[donor] = empty
            counts[donor_cluster] -= 1
            counts[empty] += 1


def _repair_empties(labels: np.ndarray, dist: np.ndarray, k: int,
                    ids: Sequence[str]) -> bool:
    """Move the globally farthest profile into each empty cluster."""
    moved = False
    counts = np.bincount(labels, minlength=k)
    own = dist[np.arange(labels.size), labels]
    for empty in range(k):
        if counts[empty] > 0:
            continue
        candidates = [i for i in range(labels.size) if counts[labels[i]] > 1]
        if not candidates:
            raise TooFewProfiles("cannot repair empty cluster")
        donor = max(candidates, key=lambda i: (own[i], ids[i]))
        counts[labels[donor]] -= 1
        labels[donor] = empty
        counts[empty] += 1
        moved = True
    return moved


def cluster(profiles: Sequence[NormalizedProfile], k: int, seed: int,
            max_iter: int = 100, *,
            init_labels: Sequence[int] | None = None) -> ClusterModel:
    """Partition normalized profiles into ``k`` clusters.

    Deterministic for fixed inputs, ``k``, ``seed`` and ``max_iter``.
    Assignment ties go to the lowest cluster index; clusters emptied by a
    reassignment are repopulated with the farthest profile before the next
    pass. ``init_labels`` overrides the seeded random initialization (a
    testing and extension hook).
    """
    n = len(profiles)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewProfiles(f"{n} profiles cannot fill {k} clusters")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    ids = [p.building_id for p in profiles]
    if len(set(ids)) != n:
        raise ValueError("duplicate building ids in profiles")
    x = np.stack([np.asarray(p.z, dtype=np.float64) for p in profiles])
    m = x.shape[1]

    if init_labels is not None:
        labels = np.asarray(init_labels, dtype=np.intp).copy()
        if labels.shape != (n,) or labels.min() < 0 or labels.max() >= k:
            raise ValueError("init_labels must give one cluster in [0, k) "
                             "per profile")
    else:
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, k, size=n).astype(np.intp)
    _fill_initial_empties(labels, k, ids)

    spectra = RowSpectra(x)
    # members are accumulated in building-id order so the fit is invariant
    # to the order profiles were passed in
    id_order = sorted(range(n), key=ids.__getitem__)
    centroids = np.zeros((k, m))
    objective_history: list[float] = []
    dist = np.zeros((n, k))
    iterations = 0

    for _ in range(max_iter):
        iterations += 1
        for c in range(k):
            members = [i for i in id_order if labels[i] == c]
            centroids[c] = shape_extract(x[members], centroids[c])
        for c in range(k):
            dist[:, c] = spectra.distances_to(centroids[c])
        new_labels = dist.argmin(axis=1).astype(np.intp)
        objective_history.append(float(
            ((1.0 - dist[np.arange(n), new_labels]) ** 2).sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        _repair_empties(labels, dist, k, ids)

    own = dist[np.arange(n), labels]
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignment={ids[i]: int(labels[i]) for i in id_order},
        distances={ids[i]: float(own[i]) for i in id_order},
        iterations_run=iterations,
        seed=seed,
        objective_history=objective_history,
    )


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def model_to_json_dict(model: ClusterModel,
                       partition: SeasonPartition) -> dict:
    """Serializable form; centroids split per season for display."""
    centroids = []
    for c in range(model.k):
        blocks = deconcatenate(model.centroids[c], partition)
        centroids.append({
            name: [float(v) for v in blocks[s]]
            for s, name in enumerate(partition.season_names)
        })
    return {
        "k": model.k,
        "seed": model.seed,
        "iterations_run": model.iterations_run,
        "fingerprint": model.fingerprint(),
        "partition": partition.name,
        "season_names": list(partition.season_names),
        "centroids": centroids,
        "assignment": {bid: model.assignment[bid]
                       for bid in sorted(model.assignment)},
        "distances": {bid: model.distances[bid]
                      for bid in sorted(model.distances)},
        "objective_history": model.objective_history,
    }


def model_from_json_dict(doc: Mapping) -> ClusterModel:
    season_names = doc["season_names"]
    centroids = np.array([
        np.concatenate([entry[name] for name in season_names])
        for entry in doc["centroids"]
    ])
    model = ClusterModel(
        k=int(doc["k"]),
        centroids=centroids,
        assignment={bid: int(c) for bid, c in doc["assignment"].items()},
        distances={bid: float(d) for bid, d in doc["distances"].items()},
        iterations_run=int(doc["iterations_run"]),
        seed=int(doc["seed"]),
        objective_history=[float(v) for v in doc.get("objective_history", [])],
    )
    stored = doc.get("fingerprint")
    if stored is not None and stored != model.fingerprint():
        raise ValueError("model fingerprint does not match its centroids")
    return model
