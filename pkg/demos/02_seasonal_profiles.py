"""From 8760 hourly readings to a four-season 168-hour profile.

One building's year is averaged into per-season hour-of-week vectors,
then concatenated and z-normalized into the form the clustering works on.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from heatpatterns.profiles import FOUR_SEASON, extract_profile, normalize
from heatpatterns.synthetic import generate_fixture

from _output import output_path

fixture = generate_fixture({"TCO5": 1}, noise=0.1, seed=3)
series = fixture.series[0]
profile = extract_profile(series, FOUR_SEASON)
normalized = normalize(profile, FOUR_SEASON)

print(f"{series.building_id}: weeks per season "
      f"{dict(zip(FOUR_SEASON.season_names, profile.weeks_used))}")
print(f"normalized vector: length {normalized.z.size}, "
      f"mean {normalized.z.mean():+.2e}, std {normalized.z.std():.6f}")

fig, axes = plt.subplots(1, 4, figsize=(14, 3), sharey=True)
hours = np.arange(168)
for s, (ax, name) in enumerate(zip(axes, FOUR_SEASON.season_names)):
    ax.plot(hours, profile.seasonal_vectors[s], color="#246", lw=1.0)
    ax.set_title(name)
    ax.set_xticks([0, 72, 144])
    ax.set_xlabel("hour of week")
axes[0].set_ylabel("mean heat load (kW)")
fig.suptitle(f"{series.building_id}: five-day time clock operation, "
             "averaged per season")
fig.tight_layout()
out = output_path("02_seasonal_profile.png")
fig.savefig(out, dpi=120)
print(f"wrote {out}")

fig, ax = plt.subplots(figsize=(10, 2.6))
ax.plot(normalized.z, color="#262", lw=0.8)
for edge in (168, 336, 504):
    ax.axvline(edge, color="#999", lw=0.6, ls=":")
ax.set_title("concatenated and z-normalized (clustering input)")
ax.set_xlabel("position")
fig.tight_layout()
out = output_path("02_normalized_form.png")
fig.savefig(out, dpi=120)
print(f"wrote {out}")
