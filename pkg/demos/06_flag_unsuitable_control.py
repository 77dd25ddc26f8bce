"""From patterns to suitability flags.

Clusters a mixed fixture, pre-fills strategy labels from the shape
heuristics (the expert would confirm or correct these in the viewer),
then applies the three suitability rules: multi-dwelling buildings need
continuous operation, commercial and industrial buildings need time clock
operation, and night setback is unsuitable everywhere.
"""

from collections import Counter

from heatpatterns.kshape import cluster
from heatpatterns.profiles import FOUR_SEASON, extract_profile, normalize
from heatpatterns.strategy import (ClusterLabel, flag_unsuitable,
                                   make_labeling, suggest_labels)
from heatpatterns.synthetic import generate_fixture

fixture = generate_fixture({"COC": 30, "NSB": 30, "TCO5": 30, "TCO7": 30},
                           noise=0.1, seed=9)
profiles = [normalize(extract_profile(s, FOUR_SEASON), FOUR_SEASON)
            for s in fixture.series]
model = cluster(profiles, 4, seed=1)

suggestions = suggest_labels(model, FOUR_SEASON)
print("heuristic suggestions per cluster:")
for c, suggestion in sorted(suggestions.items()):
    print(f"  cluster {c}: {suggestion.strategy.value} "
          f"(confidence {suggestion.confidence:.2f})")

# accept the suggestions as the expert labeling for this demo
labeling = make_labeling(
    model, {c: ClusterLabel(s.strategy) for c, s in suggestions.items()},
    author="demo")

categories = {s.building_id: s.category for s in fixture.series}
flags = flag_unsuitable(model.assignment, labeling, categories)

verdicts = Counter(f.verdict.value for f in flags)
rules = Counter(f.rule for f in flags if f.rule)
print(f"\nverdicts: {dict(verdicts)}")
print(f"rules tripped: {dict(rules)}")
print("\nsample of unsuitable buildings:")
for f in [f for f in flags if f.rule][:8]:
    print(f"  {f.building_id}: {f.category.value} with {f.strategy.value} "
          f"-> {f.rule}")
