"""Command-line interface.

Subcommands: expand (lower design spaces), build (run tool flows and extract
reports), aggregate (flatten to csv/jsonl, optionally archive), regress
(compare two exported tables), stats (coverage summaries), demo (end-to-end
run on the bundled designs).

Exit codes: 0 success, 1 partial failure (e.g. designs that failed to lower),
2 configuration error, 3 environment error (missing tool), 4 no data.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import aggregate as agg
from .analysis import (
    DEFAULT_COVERAGE_METRICS,
    DEFAULT_REGRESSION_METRICS,
    compare_tool_versions,
    coverage_summary,
    format_coverage_table,
    format_regression_table,
    histogram,
)
from .core import (
    DatasetCollection,
    WorkspaceLayout,
    design_dir,
    design_identity,
    load_dataset,
    load_post_frontend,
)
from .errors import (
    ConfigError,
    EmptyDataset,
    ExecutableNotFound,
    HlsForgeError,
    MissingDirectory,
    NoPairs,
)
from .executor import (
    Timeline,
    execute_parallel_fine_grained,
    execute_parallel_naive,
    utilization_rows,
    write_timeline,
)
from .frontends import FrontendConfig, empty_assignment, execute_frontend, lower_xilinx
from .toolflows import (
    KIND_EXTERNAL,
    MockCostConstants,
    ToolFlowSpec,
    custom_flow,
    intel_hls_flow,
    mock_impl_flow,
    mock_synth_flow,
    simulated_runtime_s,
    tool_version,
    vitis_hls_impl_flow,
    vitis_hls_synth_flow,
)

WORK_DIR_ENV = "HLSFORGE_WORK_DIR"


@dataclasses.dataclass
class RunConfig:
    work_dir: Path
    seed: int
    datasets: dict
    frontend: FrontendConfig
    flows: list
    strategy: str
    n_workers: int
    pin_cores: bool


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def load_run_config(path: Path) -> RunConfig:
    """Parse and validate the single-JSON run configuration."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    _expect(isinstance(payload, dict), "config root must be a JSON object")

    work_dir = os.environ.get(WORK_DIR_ENV) or payload.get("work_dir")
    _expect(bool(work_dir), f"work_dir is required (or set {WORK_DIR_ENV})")

    seed = payload.get("seed", 0)
    _expect(isinstance(seed, int), "seed must be an integer")

    datasets = payload.get("datasets", {})
    _expect(isinstance(datasets, dict), "datasets must map names to directories")
    for name, value in datasets.items():
        _expect(isinstance(value, str), f"datasets.{name} must be a directory path string")

    raw_frontend = payload.get("frontend", {})
    _expect(isinstance(raw_frontend, dict), "frontend must be an object")
    try:
        frontend = FrontendConfig(
            vendor=raw_frontend.get("vendor", "xilinx"),
            random_sample=bool(raw_frontend.get("random_sample", True)),
            n_samples=int(raw_frontend.get("n_samples", 1)),
            seed=seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"frontend: {exc}") from exc

    flows = payload.get("flows", [])
    _expect(isinstance(flows, list), "flows must be a list")
    for i, flow in enumerate(flows):
        _expect(isinstance(flow, dict) and "type" in flow, f"flows[{i}] must be an object with a type")

    executor = payload.get("executor", {})
    _expect(isinstance(executor, dict), "executor must be an object")
    strategy = executor.get("strategy", "fine_grained")
    _expect(strategy in ("fine_grained", "naive"),
            "executor.strategy must be fine_grained or naive")
    n_workers = executor.get("n_workers", os.cpu_count() or 1)
    _expect(isinstance(n_workers, int) and n_workers >= 1,
            "executor.n_workers must be a positive integer")
    pin_cores = bool(executor.get("pin_cores", False))

    return RunConfig(work_dir=Path(work_dir), seed=seed, datasets=datasets, frontend=frontend,
                     flows=flows, strategy=strategy, n_workers=n_workers, pin_cores=pin_cores)


def _mock_constants(raw: dict) -> MockCostConstants:
    overrides = raw.get("constants", {})
    if not isinstance(overrides, dict):
        raise ConfigError("flow constants must be an object")
    known = {f.name for f in dataclasses.fields(MockCostConstants)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown mock constant(s): {', '.join(sorted(unknown))}")
    return dataclasses.replace(MockCostConstants(), **overrides)


def build_flow_specs(raw_flows: list) -> list[ToolFlowSpec]:
    """Instantiate every configured flow up front (missing tools fail fast)."""
    specs = []
    for i, raw in enumerate(raw_flows):
        kind = raw["type"]
        timeout_s = float(raw.get("timeout_s", 3600.0))
        environment = tuple(sorted((k, str(v)) for k, v in raw.get("environment", {}).items()))
        if kind == "mock_synth":
            specs.append(mock_synth_flow(timeout_s=timeout_s, constants=_mock_constants(raw)))
        elif kind == "mock_impl":
            specs.append(mock_impl_flow(timeout_s=timeout_s, constants=_mock_constants(raw)))
        elif kind == "vitis_hls_synth":
            specs.append(vitis_hls_synth_flow(executable=raw.get("executable", "vitis_hls"),
                                              timeout_s=timeout_s, environment=environment))
        elif kind == "vitis_hls_impl":
            specs.append(vitis_hls_impl_flow(executable=raw.get("executable", "vitis_hls"),
                                             timeout_s=timeout_s, environment=environment))
        elif kind == "intel_hls":
            specs.append(intel_hls_flow(executable=raw.get("executable", "i++"),
                                        timeout_s=timeout_s,
                                        command=tuple(raw.get("command", ())),
                                        environment=environment))
        elif kind == "custom":
            command = raw.get("command")
            if not command:
                raise ConfigError(f"flows[{i}]: custom flow needs a command list")
            specs.append(custom_flow(name=raw.get("name", f"custom_{i}"), command=tuple(command),
                                     required_files=tuple(raw.get("required_files", ())),
                                     timeout_s=timeout_s, environment=environment))
        else:
            raise ConfigError(f"flows[{i}]: unknown flow type {kind!r}")
    return specs


def run_flows(collection: DatasetCollection, specs: list[ToolFlowSpec], strategy: str,
              n_workers: int, pin_cores: bool) -> tuple[dict, Timeline]:
    """Run every flow over the collection on one shared clock.

    Returns ({flow_name: {design_id: outcome}}, timeline).
    """
    execute = execute_parallel_fine_grained if strategy == "fine_grained" \
        else execute_parallel_naive
    timeline = Timeline(n_workers)
    origin = time.monotonic()
    results: dict = {}
    for spec in specs:
        outcomes, timeline = execute(collection, spec, n_workers, pin_cores=pin_cores,
                                     origin=origin, timeline=timeline)
        results[spec.name] = {o.design_id: o for o in outcomes}
    return results, timeline


def extract_reports(collection: DatasetCollection, specs: list[ToolFlowSpec],
                    results: dict) -> int:
    """Parse whatever reports exist and write the per-design data_*.json files.

    Execution metadata reflects the first configured flow (synthesis by
    convention); mock flows record their deterministic simulated runtime.
    """
    n_written = 0
    primary = specs[0] if specs else None
    version = tool_version(primary) if primary else ""
    for dataset in collection.values():
        for design in dataset.designs:
            root = design_dir(design)
            bundle = agg.MetricsBundle()
            csynth_path = root / agg.CSYNTH_REPORT_RELPATH
            if csynth_path.exists():
                try:
                    bundle.hls = agg.parse_vitis_csynth_report(csynth_path.read_text())
                except HlsForgeError:
                    bundle.hls = None
            impl_path = root / agg.IMPL_REPORT_RELPATH
            if impl_path.exists():
                try:
                    bundle.impl = agg.parse_impl_report(impl_path.read_text())
                except HlsForgeError:
                    bundle.impl = None
            if primary is not None:
                outcome = results.get(primary.name, {}).get(design_identity(design))
                if outcome is not None:
                    if primary.kind == KIND_EXTERNAL:
                        runtime = round(outcome.runtime_s, 6)
                    elif bundle.hls is not None:
                        runtime = simulated_runtime_s(bundle.hls.lut, bundle.hls.ff)
                    else:
                        runtime = 0.0
                    bundle.execution = agg.ExecutionMeta(
                        tool_name=primary.name, tool_version=version,
                        runtime_s=runtime, status=outcome.status)
            written = agg.write_standard_json(root, bundle)
            n_written += len(written)
    return n_written


def _print_flow_summary(results: dict) -> None:
    for flow_name, by_design in results.items():
        counts: dict[str, int] = {}
        for outcome in by_design.values():
            counts[outcome.status] = counts.get(outcome.status, 0) + 1
        summary = ", ".join(f"{status}={count}" for status, count in sorted(counts.items()))
        print(f"flow {flow_name}: {summary}")


def cmd_expand(args) -> int:
    config = load_run_config(args.config)
    _expect(bool(config.datasets), "expand needs a non-empty datasets map")
    layout = WorkspaceLayout(config.work_dir).ensure()
    collection: DatasetCollection = {}
    for name, directory in config.datasets.items():
        collection[name] = load_dataset(Path(directory), name)
    result = execute_frontend(collection, config.frontend, layout)
    for (dataset_name, design_name), (space, lowered) in result.sizes.items():
        print(f"{dataset_name}/{design_name}: space={space} sampled={lowered}")
    for dataset_name, design_name, message in result.failures:
        print(f"FAILED {dataset_name}/{design_name}: {message}", file=sys.stderr)
    return 1 if result.failures else 0


def cmd_build(args) -> int:
    config = load_run_config(args.config)
    _expect(bool(config.flows), "build needs a non-empty flows list")
    specs = build_flow_specs(config.flows)
    collection = load_post_frontend(config.work_dir)
    if not collection:
        print(f"no post-frontend designs under {config.work_dir}", file=sys.stderr)
        return 4
    results, timeline = run_flows(collection, specs, config.strategy, config.n_workers,
                                  config.pin_cores)
    extract_reports(collection, specs, results)
    timeline_path = write_timeline(config.work_dir / "timeline.json", timeline)
    _print_flow_summary(results)
    n_designs = sum(len(ds.designs) for ds in collection.values())
    print(f"{n_designs} designs processed; timeline at {timeline_path}")
    if args.utilization_csv:
        with open(args.utilization_csv, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=("worker", "n_jobs", "busy_s", "span_s"),
                                    lineterminator="\n")
            writer.writeheader()
            writer.writerows(utilization_rows(timeline))
        print(f"worker utilization at {args.utilization_csv}")
    return 0


def cmd_aggregate(args) -> int:
    config = load_run_config(args.config)
    table = agg.aggregate_collection(config.work_dir)
    out = Path(args.out) if args.out else config.work_dir / f"aggregated.{args.format}"
    agg.export_tabular(table, out, format=args.format)
    print(f"{len(table.rows)} rows -> {out}")
    if args.archive:
        archive_path = agg.archive_dataset(config.work_dir, Path(args.archive),
                                           include_artifacts=args.include_artifacts)
        print(f"archive -> {archive_path}")
    return 0


def cmd_regress(args) -> int:
    table_a = agg.load_table(Path(args.table_a))
    table_b = agg.load_table(Path(args.table_b))
    metrics = tuple(args.metrics.split(",")) if args.metrics else DEFAULT_REGRESSION_METRICS
    report = compare_tool_versions(table_a, table_b, metrics=metrics, alpha=args.alpha)
    print(format_regression_table(report))
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
        print(f"report -> {args.json}")
    return 0


def cmd_stats(args) -> int:
    table = agg.load_table(Path(args.table))
    if not table.rows:
        print("table has no rows", file=sys.stderr)
        return 4
    metrics = tuple(args.metrics.split(",")) if args.metrics else DEFAULT_COVERAGE_METRICS
    summary = coverage_summary(table, group_by=args.group_by, metrics=metrics)
    print(format_coverage_table(summary))
    if args.hist:
        values = [float(v) for row in table.rows
                  if (v := getattr(row, args.hist, None)) is not None]
        if values:
            print(f"\nhistogram of {args.hist} ({len(values)} values)")
            for lo, hi, count in histogram(values, args.bins):
                print(f"  [{lo:>14.4f}, {hi:>14.4f}) {count:>6} {'#' * min(count, 60)}")
        else:
            print(f"\nno values for {args.hist}")
    if args.json:
        Path(args.json).write_text(json.dumps(summary.to_json_dict(), indent=2) + "\n")
        print(f"summary -> {args.json}")
    return 0


def bundled_designs_dir() -> Path:
    """Directory of the designs shipped inside the package."""
    return Path(str(resources.files("hlsforge") / "fixtures" / "designs"))


def cmd_demo(args) -> int:
    out_dir = Path(args.out)
    layout = WorkspaceLayout(out_dir).ensure()
    fixtures = bundled_designs_dir()

    sampled_source = load_dataset(fixtures, "demo")
    frontend = FrontendConfig(vendor="xilinx", random_sample=True,
                              n_samples=args.n_samples, seed=args.seed)
    result = execute_frontend({"demo": sampled_source}, frontend, layout)
    for (dataset_name, design_name), (space, lowered) in result.sizes.items():
        print(f"{dataset_name}/{design_name}: space={space} sampled={lowered}")
    if result.failures:
        for dataset_name, design_name, message in result.failures:
            print(f"FAILED {dataset_name}/{design_name}: {message}", file=sys.stderr)
        return 1

    base_source = load_dataset(fixtures, "demo_base")
    base_designs = [lower_xilinx(design, empty_assignment(), layout)
                    for design in base_source.designs]
    print(f"demo_base: {len(base_designs)} all-defaults baselines lowered")

    collection = load_post_frontend(out_dir)
    specs = [mock_synth_flow(), mock_impl_flow()]
    results, timeline = run_flows(collection, specs, args.strategy, args.n_workers,
                                  pin_cores=False)
    extract_reports(collection, specs, results)
    write_timeline(out_dir / "timeline.json", timeline)
    _print_flow_summary(results)

    table = agg.aggregate_collection(out_dir)
    csv_path = agg.export_tabular(table, out_dir / "aggregated.csv", format="csv")
    jsonl_path = agg.export_tabular(table, out_dir / "aggregated.jsonl", format="jsonl")
    summary = coverage_summary(table, group_by="dataset")
    (out_dir / "coverage.json").write_text(
        json.dumps(summary.to_json_dict(), indent=2) + "\n")
    print(format_coverage_table(summary))
    print(f"{len(table.rows)} rows -> {csv_path} and {jsonl_path}")
    print(f"coverage -> {out_dir / 'coverage.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hlsforge",
                                     description="HLS design-space dataset generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="lower every dataset's design spaces")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("build", help="run tool flows over the post-frontend tree")
    p.add_argument("--config", required=True)
    p.add_argument("--utilization-csv", default=None,
                   help="also write per-worker utilization to this CSV")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("aggregate", help="flatten results into a table")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--archive", default=None, help="also write a zip archive here")
    p.add_argument("--include-artifacts", action="store_true",
                   help="include hls_prj trees in the archive")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("regress", help="compare two exported tables (Wilcoxon)")
    p.add_argument("table_a")
    p.add_argument("table_b")
    p.add_argument("--metrics", default=None, help="comma-separated column names")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("stats", help="coverage summary of an exported table")
    p.add_argument("table")
    p.add_argument("--group-by", default="base_name")
    p.add_argument("--metrics", default=None, help="comma-separated column names")
    p.add_argument("--hist", default=None, help="also print a histogram of this column")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("demo", help="end-to-end run on the bundled designs")
    p.add_argument("--out", default="hlsforge_demo")
    p.add_argument("--n-samples", type=int, default=4)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n-workers", type=int, default=4)
    p.add_argument("--strategy", choices=("fine_grained", "naive"), default="fine_grained")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExecutableNotFound as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return 3
    except (NoPairs, EmptyDataset, MissingDirectory) as exc:
        print(f"no data: {exc}", file=sys.stderr)
        return 4
    except HlsForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
