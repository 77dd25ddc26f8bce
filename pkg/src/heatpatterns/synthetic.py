"""Synthetic smart-meter fixtures with planted archetypes and faults.

Each building gets a full hourly year synthesized from one of four weekly
control-strategy templates (continuous operation, night setback, five-day
and seven-day time clock), modulated by a monthly seasonal factor and a
per-building scale. Noise has two parts: a persistent per-building
deformation of the weekly shape (survives profile averaging, controls how
hard clustering is) and hourly measurement noise (mostly averages out,
exercises cleaning). Fault injection plants stuck meters, long gaps,
scrambled shapes, and isolated spikes with known ground truth.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Mapping

import numpy as np

from .meterdata import CustomerCategory, RawMeterSeries, hours_in_year

HOURS_PER_WEEK = 168

FAULT_KINDS = ("long_gap", "scramble", "spike", "stuck")


_HOURS = np.arange(24)


def _bump(center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((_HOURS - center) / width) ** 2)


# Daily shapes are smooth sums of sinusoids and Gaussian bumps: real heat
# loads have no exact plateaus, and continuous curves keep the local MAD of
# a clean year well above the jump-detection floor (no self-inflicted
# repairs on fault-free fixtures).

def _template_coc() -> np.ndarray:
    # around-the-clock operation: hot-water draw gives small daytime swell
    day = (10.0 + 0.9 * np.sin(2 * np.pi * (_HOURS - 15) / 24)
           + 0.35 * np.sin(4 * np.pi * (_HOURS - 8) / 24))
    return np.tile(day, 7)


def _template_nsb() -> np.ndarray:
    # night setback: reduced nights, narrow morning recovery peak that
    # fades fast; the narrow peak is what separates it from the wide
    # time-clock daytime dome under shift-invariant correlation
    day = (8.5 + 2.8 * _bump(7.0, 1.5) - 2.4 * _bump(2.5, 3.0)
           + 1.5 * np.sin(2 * np.pi * (_HOURS - 18) / 24))
    return np.tile(day, 7)


def _template_tco7() -> np.ndarray:
    # ventilation clocked off at night, every day of the week
    day = (9.0 + 3.0 * _bump(12.5, 3.6) - 2.2 * _bump(2.0, 2.6)
           + 0.8 * np.sin(2 * np.pi * (_HOURS - 17) / 24))
    return np.tile(day, 7)


def _template_tco5() -> np.ndarray:
    # like TCO7 but the ventilation stays off across the weekend
    workday = (9.0 + 3.0 * _bump(12.5, 3.6) - 2.2 * _bump(2.0, 2.6)
               + 0.8 * np.sin(2 * np.pi * (_HOURS - 17) / 24))
    weekend = (8.0 - 2.2 * _bump(2.0, 2.6) + 0.3 * _bump(13.0, 5.0)
               + 0.8 * np.sin(2 * np.pi * (_HOURS - 16) / 24))
    return np.concatenate([np.tile(workday, 5), np.tile(weekend, 2)])


ARCHETYPES: dict[str, np.ndarray] = {
    "COC": _template_coc(),
    "NSB": _template_nsb(),
    "TCO5": _template_tco5(),
    "TCO7": _template_tco7(),
}

ARCHETYPE_CATEGORY: dict[str, CustomerCategory] = {
    "COC": CustomerCategory.MULTI_DWELLING,
    "NSB": CustomerCategory.COMMERCIAL,
    "TCO5": CustomerCategory.SCHOOL,
    "TCO7": CustomerCategory.PUBLIC_ADMINISTRATION,
}

#: seasonal amplitude per calendar month
MONTH_SCALE = {12: 1.45, 1: 1.45, 2: 1.45,
               3: 1.15, 4: 1.15, 10: 1.15, 11: 1.15,
               5: 0.85, 9: 0.85,
               6: 0.55, 7: 0.55, 8: 0.55}


@dataclass(frozen=True)
class TruthRecord:
    building_id: str
    archetype: str
    category: CustomerCategory
    fault: str  # "none" or one of FAULT_KINDS


@dataclass
class SyntheticFixture:
    year: int
    series: list[RawMeterSeries]
    truth: list[TruthRecord]

    def archetype_of(self) -> dict[str, str]:
        return {t.building_id: t.archetype for t in self.truth}

    def faulty_ids(self, kind: str | None = None) -> list[str]:
        return [t.building_id for t in self.truth
                if t.fault != "none" and kind in (None, t.fault)]


def _hour_scaffold(year: int) -> tuple[np.ndarray, np.ndarray]:
    """(hour-of-week, seasonal scale) for every hour of the year grid."""
    n_hours = hours_in_year(year)
    jan1 = date(year, 1, 1)
    how = (jan1.weekday() * 24 + np.arange(n_hours)) % HOURS_PER_WEEK
    months = np.empty(n_hours // 24, dtype=np.intp)
    for d in range(months.size):
        months[d] = (jan1 + timedelta(days=d)).month
    scale_by_month = np.array([MONTH_SCALE[m] for m in range(1, 13)])
    scale = np.repeat(scale_by_month[months - 1], 24)
    return how, scale


def _smooth_deviation(rng: np.random.Generator, noise: float,
                      template_std: float) -> np.ndarray:
    """Per-building persistent 168-hour shape deformation."""
    raw = rng.normal(size=HOURS_PER_WEEK)
    kernel = np.ones(9) / 9.0
    wrapped = np.concatenate([raw[-4:], raw, raw[:4]])
    smooth = np.convolve(wrapped, kernel, mode="valid")
    sd = smooth.std()
    if sd == 0.0 or noise == 0.0:
        return np.zeros(HOURS_PER_WEEK)
    return smooth / sd * (noise * template_std)


def generate_fixture(mix: Mapping[str, int], noise: float = 0.1,
                     faults: Mapping[str, int] | None = None,
                     seed: int = 0, year: int = 2021) -> SyntheticFixture:
    """Build a deterministic fixture from an archetype mix.

    ``mix`` maps archetype names to building counts, ``faults`` maps fault
    kinds to how many buildings receive each. Faulted buildings are chosen
    from the whole population without replacement.
    """
    for name in mix:
        if name not in ARCHETYPES:
            raise ValueError(f"unknown archetype {name!r}")
    faults = dict(faults or {})
    for kind in faults:
        if kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {kind!r}")
    n_total = sum(mix.values())
    n_faults = sum(faults.values())
    if n_faults > n_total:
        raise ValueError("more faults than buildings")

    rng = np.random.default_rng(seed)
    how, scale = _hour_scaffold(year)
    n_hours = how.size

    roster: list[tuple[str, str]] = []
    counter = 0
    for name in sorted(mix):
        for _ in range(mix[name]):
            roster.append((f"B{counter:04d}", name))
            counter += 1

    fault_of: dict[str, str] = {}
    if n_faults:
        chosen = rng.choice(n_total, size=n_faults, replace=False)
        cursor = 0
        for kind in sorted(faults):
            for _ in range(faults[kind]):
                fault_of[roster[int(chosen[cursor])][0]] = kind
                cursor += 1

    series = []
    truth = []
    for bid, name in roster:
        template = ARCHETYPES[name]
        fault = fault_of.get(bid, "none")
        alpha = rng.uniform(0.6, 4.0)
        deviation = _smooth_deviation(rng, noise, float(template.std()))
        weekly = template + deviation
        meas = rng.normal(0.0, 0.5 * noise * float(template.std()),
                          size=n_hours) if noise > 0 else 0.0
        values = alpha * (scale * weekly[how] + meas)
        np.clip(values, 0.0, None, out=values)

        if fault == "scramble":
            # permute the whole year: hour-of-week structure and seasonal
            # levels both dissolve, leaving a profile unlike any pattern
            values = values[rng.permutation(n_hours)]
        elif fault == "stuck":
            start = int(rng.integers(500, n_hours - 200))
            run = int(48 + rng.integers(0, 72))
            values[start:start + run] = values[start]
        elif fault == "long_gap":
            start = int(rng.integers(500, n_hours - 300))
            run = int(49 + rng.integers(0, 120))
            values[start:start + run] = np.nan
        elif fault == "spike":
            for pos in rng.integers(100, n_hours - 100, size=3):
                values[int(pos)] *= 40.0

        series.append(RawMeterSeries(
            building_id=bid,
            category=ARCHETYPE_CATEGORY[name],
            year=year,
            start=datetime(year, 1, 1),
            values=values,
        ))
        truth.append(TruthRecord(building_id=bid, archetype=name,
                                 category=ARCHETYPE_CATEGORY[name],
                                 fault=fault))
    return SyntheticFixture(year=year, series=series, truth=truth)


def write_fixture_csv(fixture: SyntheticFixture, readings_path,
                      metadata_path=None, truth_path=None) -> None:
    """Emit the fixture in the ingestion CSV formats."""
    stamps = None
    with open(readings_path, "w", newline="") as fh:
        fh.write("building_id,category,timestamp,heat_kw\n")
        for s in fixture.series:
            if stamps is None:
                stamps = [(s.start + timedelta(hours=i)).isoformat()
                          for i in range(s.n_hours)]
            prefix = f"{s.building_id},{s.category.value},"
            rows = []
            for i, v in enumerate(s.values):
                kw = "" if np.isnan(v) else f"{v:.4f}"
                rows.append(f"{prefix}{stamps[i]},{kw}\n")
            fh.writelines(rows)
    if metadata_path is not None:
        with open(metadata_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["building_id", "category"])
            for s in fixture.series:
                writer.writerow([s.building_id, s.category.value])
    if truth_path is not None:
        with open(truth_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["building_id", "archetype", "category", "fault"])
            for t in fixture.truth:
                writer.writerow([t.building_id, t.archetype,
                                 t.category.value, t.fault])


def parse_mix(spec: str) -> dict[str, int]:
    """Parse ``"COC=50,NSB=50"`` style archetype mixes."""
    out: dict[str, int] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, count = part.partition("=")
        out[name.strip()] = int(count)
    return out
