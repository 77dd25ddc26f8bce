"""Read-mostly HTTP service over a completed artifact store.

Serves the manifest, profiles, cluster models, anomaly reports, sweep
table, and label suggestions to the browser viewer, and accepts labeling
saves guarded by the final model's fingerprint (compare-and-set, writes
serialized). Suitability flags are recomputed from the current labeling
on every read, so they always reflect the latest expert assignment.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import Counter
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .errors import HeatPatternsError
from .kshape import model_from_json_dict
from .meterdata import CustomerCategory
from .strategy import (LabelingFormatError, StaleLabeling, StrategyLabeling,
                       flag_unsuitable, labeling_from_json_dict,
                       labeling_to_json_dict, load_labeling, save_labeling)

log = logging.getLogger(__name__)

REQUIRED_ARTIFACTS = ("manifest.json", "profiles.json", "model_initial.json",
                      "model_final.json", "anomaly_initial.json",
                      "anomaly_final.json", "buildings.csv",
                      "suggestions.json")


class ArtifactsMissing(HeatPatternsError):
    """The artifact store is incomplete; run the pipeline first."""


def _load_json(path: Path):
    with open(path) as fh:
        return json.load(fh)


def _load_categories(path: Path) -> dict[str, CustomerCategory]:
    import csv

    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                out[row[0]] = CustomerCategory.parse(row[1])
    return out


def _flags_payload(store: Path) -> dict:
    model = model_from_json_dict(_load_json(store / "model_final.json"))
    categories = _load_categories(store / "buildings.csv")
    labeling_path = store / "labeling.json"
    if labeling_path.exists():
        labeling = load_labeling(labeling_path, model)
    else:
        # nothing labeled yet: every cluster reads Unlabeled, verdict Unknown
        from .strategy import ClusterLabel, ControlStrategy

        labeling = StrategyLabeling(
            fingerprint=model.fingerprint(),
            labels={c: ClusterLabel(ControlStrategy.UNLABELED)
                    for c in range(model.k)},
            author="", timestamp="")
    flags = flag_unsuitable(model.assignment, labeling, categories)
    rule_counts = Counter(f.rule for f in flags if f.rule)
    verdict_counts = Counter(f.verdict.value for f in flags)
    return {
        "fingerprint": model.fingerprint(),
        "rows": [
            {"building_id": f.building_id, "category": f.category.value,
             "cluster": f.cluster, "strategy": f.strategy.value,
             "verdict": f.verdict.value, "rule": f.rule}
            for f in flags
        ],
        "rule_counts": {rule: rule_counts.get(rule, 0)
                        for rule in ("R1", "R2", "R3")},
        "verdict_counts": dict(sorted(verdict_counts.items())),
    }


def create_app(artifact_dir, static_dir=None) -> FastAPI:
    """Build the service; refuses incomplete stores with a diagnostic."""
    store = Path(artifact_dir)
    missing = [name for name in REQUIRED_ARTIFACTS
               if not (store / name).exists()]
    if missing:
        raise ArtifactsMissing(
            f"{store} lacks {', '.join(missing)}; run the pipeline first")

    app = FastAPI(title="heatpatterns", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    write_lock = threading.Lock()

    @app.get("/api/manifest")
    def manifest():
        return _load_json(store / "manifest.json")

    @app.get("/api/profiles")
    def profiles():
        return _load_json(store / "profiles.json")

    @app.get("/api/model/{which}")
    def model(which: str):
        if which not in ("initial", "final"):
            raise HTTPException(404, "model is 'initial' or 'final'")
        return _load_json(store / f"model_{which}.json")

    @app.get("/api/anomaly/{which}")
    def anomaly(which: str):
        if which not in ("initial", "final"):
            raise HTTPException(404, "report is 'initial' or 'final'")
        return _load_json(store / f"anomaly_{which}.json")

    @app.get("/api/sweep")
    def sweep():
        path = store / "sweep.json"
        if not path.exists():
            raise HTTPException(404, "this run did not sweep k")
        return _load_json(path)

    @app.get("/api/suggestions")
    def suggestions():
        return _load_json(store / "suggestions.json")

    @app.get("/api/labeling")
    def get_labeling():
        path = store / "labeling.json"
        if not path.exists():
            raise HTTPException(404, "no labeling saved yet")
        return _load_json(path)

    @app.put("/api/labeling")
    def put_labeling(doc: dict = Body(...)):
        final = model_from_json_dict(_load_json(store / "model_final.json"))
        try:
            labeling = labeling_from_json_dict(doc)
        except LabelingFormatError as exc:
            raise HTTPException(400, str(exc)) from exc
        if labeling.fingerprint != final.fingerprint():
            raise HTTPException(
                409, {"error": "StaleLabeling",
                      "message": "labeling was made against a different "
                                 "model; reload the workspace",
                      "expected": final.fingerprint()})
        if len(labeling.labels) != final.k:
            raise HTTPException(400, f"labeling must cover {final.k} "
                                "clusters")
        with write_lock:
            save_labeling(labeling, store / "labeling.json", force=True)
        log.info("labeling saved by %s", labeling.author or "unknown")
        return {"saved": True, "flags": _flags_payload(store)}

    @app.get("/api/flags")
    def flags():
        return _flags_payload(store)

    @app.get("/api/flags.csv", response_class=PlainTextResponse)
    def flags_csv():
        payload = _flags_payload(store)
        lines = ["building_id,category,cluster,strategy,verdict,rule"]
        for row in payload["rows"]:
            lines.append(",".join([row["building_id"], row["category"],
                                   str(row["cluster"]), row["strategy"],
                                   row["verdict"], row["rule"] or ""]))
        return "\n".join(lines) + "\n"

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="viewer")

    return app


def serve(artifact_dir, host: str = "127.0.0.1", port: int = 8477,
          static_dir=None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(artifact_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
