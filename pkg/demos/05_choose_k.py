"""Choosing the cluster count by mean silhouette.

Sweeps k over a range on a fixture with four planted archetypes and plots
the silhouette curve; the argmax is the recommended k.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from heatpatterns.modelselect import sweep
from heatpatterns.profiles import FOUR_SEASON, extract_profile, normalize
from heatpatterns.synthetic import generate_fixture

from _output import output_path

fixture = generate_fixture({"COC": 50, "NSB": 50, "TCO5": 50, "TCO7": 50},
                           noise=0.1, seed=1001)
profiles = [normalize(extract_profile(s, FOUR_SEASON), FOUR_SEASON)
            for s in fixture.series]

# a single random init can stall at the wrong k; keep the best of three
result = sweep(profiles, 2, 8, seed=1, restarts=3)
print("k  mean_silhouette  iterations  quality")
for row in result.rows:
    print(f"{row.k}  {row.mean_silhouette:.4f}          "
          f"{row.iterations_run}          {row.quality}")
print(f"recommended k = {result.recommended_k}")

fig, ax = plt.subplots(figsize=(7, 4))
ks = [row.k for row in result.rows]
scores = [row.mean_silhouette for row in result.rows]
ax.plot(ks, scores, marker="o", color="#246")
ax.axvline(result.recommended_k, color="#c44", ls="--",
           label=f"recommended k = {result.recommended_k}")
ax.axhspan(0.5, 0.7, color="#dec", alpha=0.5, label="reasonable range")
ax.set_xlabel("k")
ax.set_ylabel("mean silhouette")
ax.set_title("silhouette sweep (four planted archetypes)")
ax.legend()
fig.tight_layout()
out = output_path("05_silhouette_sweep.png")
fig.savefig(out, dpi=120)
print(f"wrote {out}")
