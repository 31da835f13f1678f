"""Command-line front end.

Subcommands:
  run      full identification pipeline -> report.json, coefficients.csv,
           models.csv, traces.csv (+ resolution.csv for study configs)
  compare  algorithm comparison sweeps -> comparison.csv
  mms      manufactured-solution convergence -> convergence.csv

Experiments are described by JSON configs (bundled configs can be named
directly, e.g. `mdefind run -c advection_large_default`); flags cover only
paths, seeds and parallelism.  A manifest.json is written before any
compute starts, and all files are written atomically (temp + rename).
"""

import argparse
import csv
import importlib.resources
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

from . import __version__, pipeline, solvers
from .library import LibrarySpec
from .splines import SwarmConfig

SIG = "{:.12e}"  # >= 12 significant digits for every float cell


class ConfigError(Exception):
    def __init__(self, path, message):
        super().__init__(f"config error at '{path}': {message}")
        self.field_path = path


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return SIG.format(value)
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def write_csv_atomic(path, header, rows):
    """RFC-4180-style CSV with a header row, written via temp + rename."""
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in header])
    os.replace(tmp, path)


def write_json_atomic(path, payload):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)


def _json_default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _require(data, key, types, path, default=None, required=False):
    if key not in data:
        if required:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    value = data[key]
    if not isinstance(value, types):
        expected = "/".join(t.__name__ for t in (
            types if isinstance(types, tuple) else (types,)))
        raise ConfigError(f"{path}{key}", f"expected {expected}, got {type(value).__name__}")
    return value


def _library_from_dict(data, path):
    known = {
        "max_single_derivative_order", "max_cumulative_product_order",
        "max_u_power", "include_time_derivatives", "accuracy", "pad_t",
    }
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}{key}", "unknown library field")
    kwargs = dict(data)
    if "include_time_derivatives" in kwargs:
        kwargs["include_time_derivatives"] = tuple(kwargs["include_time_derivatives"])
    try:
        return LibrarySpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path.rstrip("."), str(exc)) from None


def parse_pipeline_config(data, seed_override=None):
    """Validate a JSON config dict into a PipelineConfig (field-path errors)."""
    if not isinstance(data, dict):
        raise ConfigError("", "top-level config must be a JSON object")
    case = _require(data, "case", str, "", required=True)
    kwargs = {"case": case}
    for key, types in [
        ("nx", int), ("nt", int), ("cfl", (int, float)), ("a", (int, float)),
        ("ic_mode", str), ("use_puffer", bool), ("algorithm", str),
        ("n_eff", int), ("train_seed", int), ("test_seed", int),
        ("train_knots", int), ("test_knots", int), ("spline_degree", int),
    ]:
        value = _require(data, key, types, "")
        if value is not None:
            kwargs[key] = float(value) if types == (int, float) else value
    if "library" in data:
        kwargs["library"] = _library_from_dict(
            _require(data, "library", dict, ""), "library.")
    if "ic_library" in data:
        kwargs["ic_library"] = _library_from_dict(
            _require(data, "ic_library", dict, ""), "ic_library.")
    if "swarm" in data:
        try:
            kwargs["swarm"] = SwarmConfig(**_require(data, "swarm", dict, ""))
        except (TypeError, ValueError) as exc:
            raise ConfigError("swarm", str(exc)) from None
    if "grids" in data:
        if case in pipeline.CASES:
            grids = pipeline.default_grids(pipeline.CASES[case].epsilon_floor)
        else:
            grids = pipeline.default_grids()
        user = _require(data, "grids", dict, "")
        for key, values in user.items():
            if key not in grids:
                raise ConfigError(f"grids.{key}", "unknown grid name")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"grids.{key}", "expected a non-empty list")
            grids[key] = [float(v) for v in values]
        kwargs["grids"] = grids
    if "order_sequence" in data:
        seq = _require(data, "order_sequence", list, "")
        kwargs["order_sequence"] = tuple(int(v) for v in seq)
    if "ic_artifact" in data:
        kwargs["ic_artifact"] = _require(data, "ic_artifact", dict, "")
    if "test_ic_artifact" in data:
        kwargs["test_ic_artifact"] = _require(data, "test_ic_artifact", dict, "")
    if seed_override is not None:
        kwargs["train_seed"] = seed_override
        kwargs["test_seed"] = seed_override + 1
        swarm = kwargs.get("swarm", SwarmConfig())
        kwargs["swarm"] = SwarmConfig(**{**asdict(swarm), "seed": seed_override})
    try:
        return pipeline.PipelineConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None


def resolve_config_path(name):
    """A filesystem path, or the name of a bundled config."""
    if os.path.exists(name):
        return name, None
    stem = name[:-5] if name.endswith(".json") else name
    resource = importlib.resources.files("mdefind").joinpath(
        f"configs/{stem}.json")
    if resource.is_file():
        return str(resource), stem
    raise FileNotFoundError(
        f"config not found: '{name}' is neither a file nor a bundled config "
        f"(bundled: {', '.join(sorted(bundled_config_names()))})"
    )


def bundled_config_names():
    root = importlib.resources.files("mdefind").joinpath("configs")
    return [p.name[:-5] for p in root.iterdir() if p.name.endswith(".json")]


def _out_dir(args):
    out = args.out or os.environ.get("SITE_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out, command, config_path, args, extra=None):
    manifest = {
        "command": command,
        "config": os.path.abspath(config_path),
        "output_dir": os.path.abspath(out),
        "seed_override": args.seed,
        "jobs": args.jobs,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
        "status": "started",
    }
    manifest.update(extra or {})
    write_json_atomic(os.path.join(out, "manifest.json"), manifest)
    return manifest


def _finish_manifest(out, manifest, failures=None):
    manifest["status"] = "failed" if failures else "completed"
    manifest["failures"] = failures or []
    write_json_atomic(os.path.join(out, "manifest.json"), manifest)


COEFF_HEADER = ["term", "analytic", "predicted", "abs_error", "rel_error",
                "empirical_order"]
MODELS_HEADER = ["support", "k", "bic", "test_residual_sq", "train_residual",
                 "n_correct", "n_incorrect", "selected"]
COMPARISON_HEADER = ["case", "ic_mode", "puffer", "algorithm", "refit_ols",
                     "term_count", "n_correct", "n_incorrect", "valid",
                     "mre", "mae"]
CONVERGENCE_HEADER = ["scheme", "nx", "failed", "l2", "linf", "pairwise_order"]
RESOLUTION_HEADER = ["nx", "nt", "failed", "bic_k", "bic_n_correct",
                     "bic_n_incorrect", "optimal_k", "optimal_mre",
                     "optimal_mae", "bic_matches_optimal", "error"]
TRACES_HEADER = ["iteration", "train_rms_vif", "test_rms_vif"]


def cmd_run(args):
    path, _ = resolve_config_path(args.config)
    with open(path) as fh:
        data = json.load(fh)
    config = parse_pipeline_config(data, seed_override=args.seed)
    out = _out_dir(args)
    manifest = _write_manifest(out, "run", path, args)

    ics = pipeline.prepare_ics(config)
    report = pipeline.run_site(config, ics=ics)

    write_json_atomic(os.path.join(out, "report.json"), report.to_dict())
    write_csv_atomic(os.path.join(out, "coefficients.csv"), COEFF_HEADER,
                     report.selected_terms)
    write_csv_atomic(os.path.join(out, "models.csv"), MODELS_HEADER,
                     report.models)
    train_trace = report.pso_traces.get("train") or []
    test_trace = report.pso_traces.get("test") or []
    trace_rows = [
        {"iteration": i,
         "train_rms_vif": train_trace[i] if i < len(train_trace) else None,
         "test_rms_vif": test_trace[i] if i < len(test_trace) else None}
        for i in range(max(len(train_trace), len(test_trace)))
    ]
    write_csv_atomic(os.path.join(out, "traces.csv"), TRACES_HEADER, trace_rows)

    study = data.get("resolution_study")
    if study:
        nx_list = [int(v) for v in study.get("nx_list", [])]
        if not nx_list:
            raise ConfigError("resolution_study.nx_list", "must be non-empty")
        nt_choices = [int(v) for v in study.get("nt_choices", [])] or None
        records = _parallel_resolution(config, ics, nx_list, nt_choices,
                                       args.jobs)
        write_csv_atomic(os.path.join(out, "resolution.csv"),
                         RESOLUTION_HEADER, records)

    _finish_manifest(out, manifest)
    print(f"run complete: case={config.case} selected "
          f"{len(report.selected_terms)} terms, outputs in {out}")


def _parallel_resolution(config, ics, nx_list, nt_choices, jobs):
    pairs = [(nx, nt) for nt in (nt_choices or [config.nt]) for nx in nx_list]
    if jobs <= 1:
        return [pipeline._resolution_record(config, ics, nx, nt)
                for nx, nt in pairs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(pipeline._resolution_record, config, ics, nx, nt)
                   for nx, nt in pairs]
        return [f.result() for f in futures]


def cmd_compare(args):
    path, _ = resolve_config_path(args.config)
    with open(path) as fh:
        data = json.load(fh)
    config = parse_pipeline_config(data, seed_override=args.seed)
    comp = data.get("comparison", {})
    algorithms = tuple(comp.get("algorithms", pipeline.ALGORITHMS))
    for alg in algorithms:
        if alg not in pipeline.ALGORITHMS:
            raise ConfigError("comparison.algorithms", f"unknown algorithm {alg!r}")
    ic_modes = tuple(comp.get("ic_modes", ("spline", "gauss")))
    puffer_modes = tuple(bool(v) for v in comp.get("puffer_modes", (True, False)))
    out = _out_dir(args)
    manifest = _write_manifest(out, "compare", path, args)
    records = pipeline.algorithm_comparison(
        config, algorithms=algorithms, ic_modes=ic_modes,
        puffer_modes=puffer_modes,
    )
    write_csv_atomic(os.path.join(out, "comparison.csv"),
                     COMPARISON_HEADER, records)
    _finish_manifest(out, manifest)
    print(f"comparison complete: {len(records)} models, outputs in {out}")


def cmd_mms(args):
    if args.config:
        path, _ = resolve_config_path(args.config)
        with open(path) as fh:
            data = json.load(fh)
        mms = data.get("mms", data)
        scheme = _require(mms, "scheme", str, "mms.", required=True)
        resolutions = _require(mms, "resolutions", list, "mms.", required=True)
        cfl = _require(mms, "cfl", (int, float), "mms.")
        config_path = path
    else:
        scheme = args.scheme
        resolutions = args.resolutions
        cfl = args.cfl
        config_path = "<flags>"
        if not scheme or not resolutions:
            raise ConfigError("", "mms requires --config or --scheme/--resolutions")
    if scheme not in (solvers.FTBS, solvers.MACCORMACK, solvers.ZABUSKY_KRUSKAL):
        raise ConfigError("mms.scheme", f"unknown scheme {scheme!r}")
    if cfl is None:
        cfl = 1e-10 if scheme == solvers.ZABUSKY_KRUSKAL else 0.1
    out = _out_dir(args)
    manifest = _write_manifest(out, "mms", config_path, args,
                               extra={"scheme": scheme})
    records = solvers.mms_convergence(scheme, [int(r) for r in resolutions],
                                      float(cfl))
    for rec in records:
        rec["scheme"] = scheme
    write_csv_atomic(os.path.join(out, "convergence.csv"),
                     CONVERGENCE_HEADER, records)
    failures = [f"nx={r['nx']} unstable" for r in records if r.get("failed")]
    _finish_manifest(out, manifest, failures)
    orders = [r["pairwise_order"] for r in records
              if r.get("pairwise_order") is not None]
    print(f"mms complete: scheme={scheme}, pairwise orders "
          f"{['%.3f' % o for o in orders]}, outputs in {out}")
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mdefind",
        description="Identify modified differential equations of "
                    "finite-difference schemes from simulation data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--out", default=None,
                        help="output directory (default: $SITE_OUT_DIR or .)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the IC-optimization seeds")
    common.add_argument("--jobs", type=int, default=1,
                        help="experiment-level parallelism bound")

    p_run = sub.add_parser("run", parents=[common],
                           help="full identification pipeline")
    p_run.add_argument("-c", "--config", required=True,
                       help="JSON config path or bundled config name")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="algorithm comparison sweeps")
    p_cmp.add_argument("-c", "--config", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_mms = sub.add_parser("mms", parents=[common],
                           help="manufactured-solution convergence study")
    p_mms.add_argument("-c", "--config", default=None)
    p_mms.add_argument("--scheme", default=None,
                       choices=[solvers.FTBS, solvers.MACCORMACK,
                                solvers.ZABUSKY_KRUSKAL])
    p_mms.add_argument("--resolutions", type=int, nargs="+", default=None)
    p_mms.add_argument("--cfl", type=float, default=None)
    p_mms.set_defaults(func=cmd_mms)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return result or 0


if __name__ == "__main__":
    sys.exit(main())
