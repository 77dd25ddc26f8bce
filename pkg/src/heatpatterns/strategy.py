"""Control-strategy labels, persistence, heuristics, and suitability rules.

Experts assign one control strategy per cluster after inspecting its heat
load pattern; buildings inherit the strategy of their cluster. Three rules
then mark category/strategy combinations as unsuitable:

* R1 - multi-dwelling buildings need continuous operation control,
* R2 - commercial and industrial buildings need time clock operation,
* R3 - night setback control is unsuitable everywhere.

A building can trip several rules; the reported rule follows the
precedence R3 > R1 > R2 while the verdict itself is rule-order
independent. Labelings are persisted with the fingerprint of the model
they were made against so stale labels are rejected, not silently reused.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .errors import HeatPatternsError
from .kshape import ClusterModel
from .meterdata import CustomerCategory
from .profiles import SeasonPartition, deconcatenate


class MissingMetadata(HeatPatternsError):
    """A clustered building has no customer category."""


class StaleLabeling(HeatPatternsError):
    """Labeling fingerprint does not match the model."""


class LabelingFormatError(HeatPatternsError):
    """Labeling file violates its schema."""


class ControlStrategy(enum.Enum):
    COC = "COC"
    NSB = "NSB"
    TCO5 = "TCO5"
    TCO7 = "TCO7"
    UNLABELED = "Unlabeled"

    @classmethod
    def parse(cls, token: str) -> "ControlStrategy":
        for member in cls:
            if member.value == token:
                return member
        raise LabelingFormatError(f"unknown control strategy {token!r}")


class Verdict(enum.Enum):
    SUITABLE = "Suitable"
    UNSUITABLE = "Unsuitable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class ClusterLabel:
    strategy: ControlStrategy
    variant: str | None = None  # e.g. "COC-A"; requires a real strategy
    note: str | None = None

    def __post_init__(self):
        if self.variant and self.strategy is ControlStrategy.UNLABELED:
            raise LabelingFormatError("variant tag requires a strategy")


@dataclass
class StrategyLabeling:
    fingerprint: str
    labels: dict[int, ClusterLabel]
    author: str
    timestamp: str

    def __post_init__(self):
        if sorted(self.labels) != list(range(len(self.labels))):
            raise LabelingFormatError(
                "labels must cover cluster indices 0..k-1 exactly once")


@dataclass(frozen=True)
class SuitabilityFlag:
    building_id: str
    category: CustomerCategory
    cluster: int
    strategy: ControlStrategy
    verdict: Verdict
    rule: str | None  # "R1" | "R2" | "R3" when unsuitable


def make_labeling(model: ClusterModel,
                  labels: Mapping[int, ClusterLabel],
                  author: str,
                  timestamp: str | None = None) -> StrategyLabeling:
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return StrategyLabeling(fingerprint=model.fingerprint(),
                            labels=dict(labels), author=author,
                            timestamp=timestamp)


def evaluate_rules(category: CustomerCategory,
                   strategy: ControlStrategy) -> tuple[Verdict, str | None]:
    """Pure rule table for one (category, strategy) pair."""
    if strategy is ControlStrategy.UNLABELED:
        return Verdict.UNKNOWN, None
    tripped = []
    if strategy is ControlStrategy.NSB:
        tripped.append("R3")
    if (category is CustomerCategory.MULTI_DWELLING
            and strategy is not ControlStrategy.COC):
        tripped.append("R1")
    if (category in (CustomerCategory.COMMERCIAL,
                     CustomerCategory.INDUSTRIAL)
            and strategy not in (ControlStrategy.TCO5,
                                 ControlStrategy.TCO7)):
        tripped.append("R2")
    if not tripped:
        return Verdict.SUITABLE, None
    for rule in ("R3", "R1", "R2"):
        if rule in tripped:
            return Verdict.UNSUITABLE, rule
    raise AssertionError("unreachable")


def flag_unsuitable(assignments: Mapping[str, int],
                    labeling: StrategyLabeling,
                    categories: Mapping[str, CustomerCategory],
                    ) -> list[SuitabilityFlag]:
    """Apply the three rules to every assigned building."""
    flags = []
    for bid in sorted(assignments):
        cluster_idx = assignments[bid]
        category = categories.get(bid)
        if category is None:
            raise MissingMetadata(f"no customer category for {bid!r}")
        label = labeling.labels.get(cluster_idx)
        if label is None:
            raise LabelingFormatError(f"no label for cluster {cluster_idx}")
        verdict, rule = evaluate_rules(category, label.strategy)
        flags.append(SuitabilityFlag(building_id=bid, category=category,
                                     cluster=cluster_idx,
                                     strategy=label.strategy,
                                     verdict=verdict, rule=rule))
    return flags


# ---------------------------------------------------------------------------
# Heuristic label suggestions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuggestConfig:
    """Thresholds for the winter-block shape features, in z units.

    Suggestions pre-fill the labeling screen; the expert always has the
    final word.
    """

    flat_range: float = 1.5          # max-min below this reads as flat
    day_lift_min: float = 0.6        # weekday daytime lift over night
    weekend_ratio_max: float = 0.5   # weekend lift / weekday lift for TCO5
    morning_excess_min: float = 0.3  # morning max over midday mean for NSB


@dataclass(frozen=True)
class Suggestion:
    strategy: ControlStrategy
    confidence: float


def _clip01(v: float) -> float:
    return float(min(1.0, max(0.0, v)))


def suggest_labels(model: ClusterModel, partition: SeasonPartition,
                   config: SuggestConfig = SuggestConfig(),
                   ) -> dict[int, Suggestion]:
    """Map each centroid's winter block to a likely strategy.

    Flat patterns read as continuous operation; a daytime lift that
    disappears on weekends as five-day time clock operation; a sharp
    morning peak over a night dip as night setback; a sustained seven-day
    daytime lift as seven-day time clock operation. Never suggests
    Unlabeled and never touches persisted labelings.
    """
    out: dict[int, Suggestion] = {}
    for c in range(model.k):
        winter = deconcatenate(model.centroids[c], partition)[0]
        week = winter.reshape(7, 24)
        span = float(winter.max() - winter.min())
        night = float(week[:, 0:5].mean())
        weekday_lift = float(week[0:5, 9:17].mean()) - night
        weekend_lift = float(week[5:7, 9:17].mean()) - night
        morning_excess = (float(week[:, 5:10].max(axis=1).mean())
                          - float(week[:, 11:17].mean()))

        if span <= config.flat_range:
            out[c] = Suggestion(ControlStrategy.COC,
                                _clip01(1.0 - span / (2 * config.flat_range)))
        elif (weekday_lift > config.day_lift_min
              and weekend_lift < config.weekend_ratio_max * weekday_lift):
            out[c] = Suggestion(ControlStrategy.TCO5,
                                _clip01(1.0 - weekend_lift
                                        / max(weekday_lift, 1e-9)))
        elif morning_excess > config.morning_excess_min:
            out[c] = Suggestion(ControlStrategy.NSB,
                                _clip01(morning_excess / (2 * config.morning_excess_min)))
        elif weekday_lift > config.day_lift_min:
            out[c] = Suggestion(ControlStrategy.TCO7,
                                _clip01(weekday_lift / (2 * config.day_lift_min)))
        else:
            # nothing matched cleanly; call it continuous, but quietly
            out[c] = Suggestion(ControlStrategy.COC, 0.25)
    return out


def suggestions_to_json_dict(suggestions: Mapping[int, Suggestion]) -> dict:
    return {
        "clusters": [
            {"cluster": c, "strategy": suggestions[c].strategy.value,
             "confidence": suggestions[c].confidence}
            for c in sorted(suggestions)
        ]
    }


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise LabelingFormatError(f"duplicate key {key!r} in labeling")
        seen[key] = value
    return seen


def labeling_to_json_dict(labeling: StrategyLabeling) -> dict:
    clusters = {}
    for idx in sorted(labeling.labels):
        label = labeling.labels[idx]
        entry: dict = {"strategy": label.strategy.value}
        if label.variant:
            entry["variant"] = label.variant
        if label.note:
            entry["note"] = label.note
        clusters[str(idx)] = entry
    return {
        "fingerprint": labeling.fingerprint,
        "author": labeling.author,
        "timestamp": labeling.timestamp,
        "clusters": clusters,
    }


def labeling_from_json_dict(doc: Mapping) -> StrategyLabeling:
    try:
        clusters = doc["clusters"]
        labels = {}
        for key, entry in clusters.items():
            idx = int(key)
            if idx in labels:
                raise LabelingFormatError(f"duplicate cluster index {idx}")
            labels[idx] = ClusterLabel(
                strategy=ControlStrategy.parse(entry["strategy"]),
                variant=entry.get("variant"),
                note=entry.get("note"),
            )
        return StrategyLabeling(fingerprint=doc["fingerprint"],
                                labels=labels,
                                author=doc.get("author", ""),
                                timestamp=doc.get("timestamp", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise LabelingFormatError(f"malformed labeling: {exc}") from exc


def load_labeling(path, model: ClusterModel | None = None) -> StrategyLabeling:
    """Parse a labeling file; verify it matches ``model`` when given."""
    with open(path) as fh:
        try:
            doc = json.load(fh, object_pairs_hook=_reject_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise LabelingFormatError(f"{path}: not valid JSON: {exc}") from exc
    labeling = labeling_from_json_dict(doc)
    if model is not None and labeling.fingerprint != model.fingerprint():
        raise StaleLabeling(f"{path}: labeling was made against a different "
                            "model (fingerprint mismatch)")
    return labeling


def save_labeling(labeling: StrategyLabeling, path, force: bool = False) -> None:
    """Write a labeling file; refuse to clobber one for another model."""
    path = Path(path)
    if path.exists() and not force:
        existing = load_labeling(path)
        if existing.fingerprint != labeling.fingerprint:
            raise StaleLabeling(f"{path}: existing labeling belongs to a "
                                "different model; pass force to overwrite")
    with open(path, "w") as fh:
        json.dump(labeling_to_json_dict(labeling), fh, indent=2)
        fh.write("\n")


def write_flags_csv(path, flags: Sequence[SuitabilityFlag]) -> None:
    """``building_id,category,cluster,strategy,verdict,rule`` export."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["building_id", "category", "cluster", "strategy",
                         "verdict", "rule"])
        for f in flags:
            writer.writerow([f.building_id, f.category.value, f.cluster,
                             f.strategy.value, f.verdict.value, f.rule or ""])
