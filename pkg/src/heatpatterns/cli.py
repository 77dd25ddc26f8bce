"""Command line interface.

Subcommands mirror the pipeline stages: ``run`` executes the whole
discovery pipeline, ``sweep`` stops after the silhouette table, ``detect``
re-runs anomaly detection on stored models, ``flag`` applies a labeling,
``generate`` builds synthetic fixtures, and ``serve`` hosts the viewer
service. Exit codes: 0 success, 1 input error, 2 pipeline error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .anomaly import detect as detect_anomalies
from .anomaly import report_to_json_dict, write_report_csv
from .errors import HeatPatternsError
from .kshape import model_from_json_dict
from .meterdata import IngestError
from .modelselect import sweep as sweep_k
from .modelselect import sweep_to_json_dict, write_sweep_csv
from .pipeline import ConfigError, PipelineConfig, prepare_input, run, write_json
from .service import ArtifactsMissing, serve
from .strategy import (LabelingFormatError, StaleLabeling, load_labeling,
                       write_flags_csv)
from .synthetic import generate_fixture, parse_mix, write_fixture_csv

log = logging.getLogger(__name__)

INPUT_ERRORS = (ConfigError, IngestError, StaleLabeling, LabelingFormatError,
                ArtifactsMissing, FileNotFoundError)

_CONFIG_FLAGS = {
    "readings": "readings_csv",
    "metadata": "metadata_csv",
    "out": "output_dir",
    "partition": "partition",
    "k": "k",
    "k_min": "k_min",
    "k_max": "k_max",
    "seed": "seed",
    "max_iter": "max_iter",
    "restarts": "restarts",
    "window_hours": "window_hours",
    "eps_mad": "eps_mad",
    "long_gap_hours": "long_gap_hours",
    "total_gap_budget_hours": "total_gap_budget_hours",
    "stuck_run_hours": "stuck_run_hours",
    "eps_std": "eps_std",
}


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--readings", help="readings CSV "
                        "(building_id,category,timestamp,heat_kw)")
    parser.add_argument("--metadata", help="sidecar building_id,category CSV")
    parser.add_argument("--out", help="artifact output directory")
    parser.add_argument("--partition",
                        choices=["four_season", "three_season"])
    parser.add_argument("--k", type=int, help="fixed cluster count")
    parser.add_argument("--k-min", dest="k_min", type=int,
                        help="sweep lower bound")
    parser.add_argument("--k-max", dest="k_max", type=int,
                        help="sweep upper bound")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--window-hours", dest="window_hours", type=int)
    parser.add_argument("--eps-mad", dest="eps_mad", type=float)
    parser.add_argument("--long-gap-hours", dest="long_gap_hours", type=int)
    parser.add_argument("--total-gap-budget-hours",
                        dest="total_gap_budget_hours", type=int)
    parser.add_argument("--stuck-run-hours", dest="stuck_run_hours", type=int)
    parser.add_argument("--eps-std", dest="eps_std", type=float)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    doc: dict = {}
    if args.config:
        doc = PipelineConfig.load(args.config).to_json_dict()
    for flag, field in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            doc[field] = value
    if "readings_csv" not in doc or "output_dir" not in doc:
        raise ConfigError("need --readings and --out (or a config file "
                          "providing them)")
    return PipelineConfig.from_json_dict(doc)


def _cmd_run(args) -> int:
    config = _build_config(args)
    artifacts = run(config)
    manifest = artifacts.manifest
    counts = manifest.counts
    print(f"ingested {counts.ingested}, rejected {counts.rejected_total}, "
          f"clustered {counts.clustered}, abnormal {counts.abnormal}, "
          f"final {counts.final_clustered}")
    if manifest.recommended_k is not None:
        print(f"sweep recommended k={manifest.recommended_k}")
    print(f"k={manifest.k_used} seed={manifest.seed_used} "
          f"fingerprint={manifest.final_model_fingerprint[:12]}")
    print(f"artifacts: {config.output_dir}")
    return 0


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    if config.k_min is None or config.k_max is None:
        raise ConfigError("sweep needs --k-min and --k-max")
    config.k = None
    config.validate()
    prepared = prepare_input(config)
    result = sweep_k(prepared.normalized, config.k_min, config.k_max,
                     config.seed, config.max_iter, restarts=config.restarts)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out_dir / "sweep.csv", result)
    write_json(out_dir / "sweep.json", sweep_to_json_dict(result))
    print("k,mean_silhouette,iterations,quality")
    for row in result.rows:
        print(f"{row.k},{row.mean_silhouette:.4f},{row.iterations_run},"
              f"{row.quality}")
    print(f"recommended k={result.recommended_k}")
    return 0


def _load_model(artifact_dir: str, which: str):
    import json

    path = Path(artifact_dir) / f"model_{which}.json"
    if not path.exists():
        raise ArtifactsMissing(f"{path} not found; run the pipeline first")
    with open(path) as fh:
        return model_from_json_dict(json.load(fh))


def _cmd_detect(args) -> int:
    model = _load_model(args.artifacts, args.model)
    report = detect_anomalies(model)
    out_dir = Path(args.artifacts)
    write_json(out_dir / f"anomaly_{args.model}.json",
               report_to_json_dict(report))
    write_report_csv(out_dir / f"anomaly_{args.model}.csv", report)
    print(f"{len(report.flagged)} profiles flagged across {model.k} clusters")
    for t in report.thresholds:
        print(f"cluster {t.cluster}: size {t.size}, threshold "
              f"{t.threshold:.4f}")
    return 0


def _cmd_flag(args) -> int:
    from .meterdata import CustomerCategory

    model = _load_model(args.artifacts, "final")
    labeling = load_labeling(args.labeling, model)
    categories = {}
    import csv

    buildings = Path(args.artifacts) / "buildings.csv"
    if not buildings.exists():
        raise ArtifactsMissing(f"{buildings} not found")
    with open(buildings, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                categories[row[0]] = CustomerCategory.parse(row[1])
    from .strategy import flag_unsuitable

    flags = flag_unsuitable(model.assignment, labeling, categories)
    out = Path(args.out) if args.out else Path(args.artifacts) / "flags.csv"
    write_flags_csv(out, flags)
    unsuitable = [f for f in flags if f.rule]
    by_rule = {}
    for f in unsuitable:
        by_rule[f.rule] = by_rule.get(f.rule, 0) + 1
    print(f"{len(unsuitable)} of {len(flags)} buildings flagged unsuitable "
          f"({', '.join(f'{r}={by_rule[r]}' for r in sorted(by_rule)) or 'none'})")
    print(f"flags written to {out}")
    return 0


def _cmd_generate(args) -> int:
    mix = parse_mix(args.mix)
    faults = parse_mix(args.faults) if args.faults else None
    fixture = generate_fixture(mix, noise=args.noise, faults=faults,
                               seed=args.seed, year=args.year)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_fixture_csv(fixture,
                      out_dir / "readings.csv",
                      metadata_path=out_dir / "buildings.csv",
                      truth_path=out_dir / "truth.csv")
    print(f"{len(fixture.series)} buildings written to {out_dir} "
          f"(year {fixture.year}, noise {args.noise})")
    return 0


def _cmd_serve(args) -> int:
    serve(args.artifacts, host=args.host, port=args.port,
          static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatpatterns",
        description="Discover heat load patterns in district heating "
                    "smart-meter data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: CSV to patterns")
    _add_config_options(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="silhouette sweep over k only")
    _add_config_options(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_detect = sub.add_parser("detect",
                              help="re-run anomaly detection on a stored model")
    p_detect.add_argument("--artifacts", required=True)
    p_detect.add_argument("--model", choices=["initial", "final"],
                          default="initial")
    p_detect.set_defaults(func=_cmd_detect)

    p_flag = sub.add_parser("flag",
                            help="apply a labeling and export suitability flags")
    p_flag.add_argument("--artifacts", required=True)
    p_flag.add_argument("--labeling", required=True)
    p_flag.add_argument("--out")
    p_flag.set_defaults(func=_cmd_flag)

    p_gen = sub.add_parser("generate", help="synthetic fixture with ground truth")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--mix", default="COC=50,NSB=50,TCO5=50,TCO7=50",
                       help='archetype counts, e.g. "COC=50,NSB=50"')
    p_gen.add_argument("--noise", type=float, default=0.1)
    p_gen.add_argument("--faults",
                       help='fault counts, e.g. "stuck=5,long_gap=3,'
                            'scramble=5,spike=4"')
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--year", type=int, default=2021)
    p_gen.set_defaults(func=_cmd_generate)

    p_serve = sub.add_parser("serve", help="host the labeling service")
    p_serve.add_argument("--artifacts", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8477)
    p_serve.add_argument("--static",
                         help="directory with the built viewer to serve at /")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except HeatPatternsError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
