"""Shared helpers for building normalized-profile fixtures."""

from types import SimpleNamespace

import numpy as np
import pytest

from heatpatterns.profiles import NormalizedProfile


def znorm(x):
    x = np.asarray(x, dtype=float)
    return (x - x.mean()) / x.std()


def as_profiles(rows, prefix="P"):
    return [NormalizedProfile(building_id=f"{prefix}{i:03d}",
                              z=np.asarray(row, dtype=float))
            for i, row in enumerate(rows)]


def wave_templates(m):
    """Three shapes kept far apart under shift-invariant correlation.

    Different fundamentals (3-cycle sine, 7-cycle square, 4-per-window
    bump train) so no lag aligns one onto another; pairwise shape-based
    distances all exceed 0.7.
    """
    t = np.arange(m)
    sine = np.sin(2 * np.pi * 3 * t / m)
    square = np.sign(np.sin(2 * np.pi * 7 * t / m) + 1e-9)
    bumps = np.exp(-0.5 * ((t % 24) - 6.0) ** 2 / 2.0 ** 2)
    return [znorm(sine), znorm(square), znorm(bumps)]


def planted_profiles(n_per=10, m=96, noise=0.1, seed=0):
    """Noisy copies of the three wave templates, plus true labels."""
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for g, template in enumerate(wave_templates(m)):
        for _ in range(n_per):
            rows.append(znorm(template + rng.normal(0, noise, m)))
            labels.append(g)
    return as_profiles(rows), labels


@pytest.fixture(scope="session")
def small_store(tmp_path_factory):
    """One completed pipeline run over a 40-building fixture."""
    from heatpatterns.pipeline import PipelineConfig, run
    from heatpatterns.synthetic import generate_fixture, write_fixture_csv

    root = tmp_path_factory.mktemp("store")
    fixture = generate_fixture(
        {"COC": 10, "NSB": 10, "TCO5": 10, "TCO7": 10},
        noise=0.1, faults={"scramble": 2}, seed=13)
    write_fixture_csv(fixture, root / "readings.csv",
                      metadata_path=root / "buildings_meta.csv",
                      truth_path=root / "truth.csv")
    config = PipelineConfig(readings_csv=str(root / "readings.csv"),
                            output_dir=str(root / "out"), k=4, seed=7)
    artifacts = run(config)
    return SimpleNamespace(root=root, out=root / "out", config=config,
                           artifacts=artifacts, fixture=fixture)
