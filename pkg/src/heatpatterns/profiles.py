"""Seasonal 168-hour heat load profiles and their normalized clustering form.

A cleaned year of hourly readings is cut into Monday-aligned weeks, each
full week is assigned to the season of the month containing its Thursday,
and per-season column means over the hour-of-week axis give one 168-point
vector per season. The season vectors concatenated in partition order and
z-normalized (population standard deviation) form the input to clustering.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, timedelta
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import HeatPatternsError

log = logging.getLogger(__name__)

HOURS_PER_WEEK = 168

#: population std below which a profile cannot be z-normalized (kW)
EPS_STD = 1e-6


class EmptySeason(HeatPatternsError):
    """A season received no full week of data."""


class DegenerateProfile(HeatPatternsError):
    """Profile is (near-)constant and cannot be z-normalized."""


class ShapeError(HeatPatternsError):
    """Vector length does not match the season partition."""


@dataclass(frozen=True)
class SeasonPartition:
    """Assignment of calendar months to ordered seasons."""

    name: str
    season_names: tuple[str, ...]
    month_to_season: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "month_to_season",
                           MappingProxyType(dict(self.month_to_season)))
        if sorted(self.month_to_season) != list(range(1, 13)):
            raise ValueError("partition must map every month 1..12")
        used = set(self.month_to_season.values())
        if used != set(range(len(self.season_names))):
            raise ValueError("every listed season needs at least one month")

    @property
    def n_seasons(self) -> int:
        return len(self.season_names)

    @property
    def profile_length(self) -> int:
        return HOURS_PER_WEEK * self.n_seasons


FOUR_SEASON = SeasonPartition(
    name="four_season",
    season_names=("winter", "spring_autumn", "shoulder", "summer"),
    month_to_season={12: 0, 1: 0, 2: 0,
                     3: 1, 4: 1, 10: 1, 11: 1,
                     5: 2, 9: 2,
                     6: 3, 7: 3, 8: 3},
)

# Merges the shoulder months into summer (May, Sep) and keeps Apr/Oct in
# spring/autumn, for networks where internal gains shorten the heating season.
THREE_SEASON = SeasonPartition(
    name="three_season",
    season_names=("winter", "spring_autumn", "summer"),
    month_to_season={12: 0, 1: 0, 2: 0,
                     3: 1, 4: 1, 10: 1, 11: 1,
                     5: 2, 6: 2, 7: 2, 8: 2, 9: 2},
)

PARTITIONS: Mapping[str, SeasonPartition] = MappingProxyType({
    FOUR_SEASON.name: FOUR_SEASON,
    THREE_SEASON.name: THREE_SEASON,
})


@dataclass
class HeatLoadProfile:
    """Per-season hour-of-week averages for one building."""

    building_id: str
    seasonal_vectors: np.ndarray  # (n_seasons, 168), kW
    weeks_used: tuple[int, ...]

    def concatenated(self) -> np.ndarray:
        return self.seasonal_vectors.reshape(-1)


@dataclass
class NormalizedProfile:
    """z-normalized concatenation of the season vectors."""

    building_id: str
    z: np.ndarray


def week_starts(year: int, n_hours: int) -> list[int]:
    """Hour indices of every full Monday-00:00 week inside the year grid."""
    jan1 = date(year, 1, 1)
    offset_days = (7 - jan1.weekday()) % 7
    starts = []
    t = offset_days * 24
    while t + HOURS_PER_WEEK <= n_hours:
        starts.append(t)
        t += HOURS_PER_WEEK
    return starts


def extract_profile(series, partition: SeasonPartition) -> HeatLoadProfile:
    """Average a repaired full-year series into its seasonal profile.

    ``series`` is a :class:`heatpatterns.meterdata.RawMeterSeries` that
    passed screening and repair: it spans the whole calendar year and has
    no missing values. Partial weeks at the year boundary are dropped; a
    week belongs to the season of the month containing its Thursday.
    """
    values = np.asarray(series.values, dtype=np.float64)
    if np.isnan(values).any():
        raise ValueError(f"{series.building_id}: series still has missing "
                         "values; repair before extracting a profile")
    jan1 = date(series.year, 1, 1)
    offset_days = (7 - jan1.weekday()) % 7

    buckets: list[list[np.ndarray]] = [[] for _ in range(partition.n_seasons)]
    for j, start in enumerate(week_starts(series.year, values.size)):
        thursday = jan1 + timedelta(days=offset_days + 7 * j + 3)
        season = partition.month_to_season[thursday.month]
        buckets[season].append(values[start:start + HOURS_PER_WEEK])

    for s, weeks in enumerate(buckets):
        if not weeks:
            raise EmptySeason(
                f"season {partition.season_names[s]!r} has no full week "
                f"in {series.year}")

    vectors = np.stack([np.mean(weeks, axis=0) for weeks in buckets])
    return HeatLoadProfile(
        building_id=series.building_id,
        seasonal_vectors=vectors,
        weeks_used=tuple(len(weeks) for weeks in buckets),
    )


def normalize(profile: HeatLoadProfile, partition: SeasonPartition,
              eps_std: float = EPS_STD) -> NormalizedProfile:
    """z-normalize the concatenated season vectors (population sigma)."""
    x = profile.concatenated()
    if x.size != partition.profile_length:
        raise ShapeError(f"profile length {x.size} does not match "
                         f"partition {partition.name!r}")
    std = float(x.std())
    if std <= eps_std:
        raise DegenerateProfile(
            f"{profile.building_id}: profile is near-constant "
            f"(std {std:.3g} kW <= {eps_std:g})")
    return NormalizedProfile(building_id=profile.building_id,
                             z=(x - x.mean()) / std)


def deconcatenate(z, partition: SeasonPartition) -> np.ndarray:
    """Split a concatenated vector back into per-season 168-hour rows."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size != partition.profile_length:
        raise ShapeError(f"expected length {partition.profile_length}, "
                         f"got shape {z.shape}")
    return z.reshape(partition.n_seasons, HOURS_PER_WEEK).copy()


def profile_to_json_dict(profile: HeatLoadProfile,
                         normalized: NormalizedProfile | None,
                         partition: SeasonPartition) -> dict:
    """JSON form with deterministic field ordering, for the artifact store."""
    doc = {
        "building_id": profile.building_id,
        "seasons": {
            name: [float(v) for v in profile.seasonal_vectors[s]]
            for s, name in enumerate(partition.season_names)
        },
        "weeks_used": {
            name: profile.weeks_used[s]
            for s, name in enumerate(partition.season_names)
        },
    }
    doc["normalized"] = ([float(v) for v in normalized.z]
                         if normalized is not None else None)
    return doc
