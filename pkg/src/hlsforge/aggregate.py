"""Report parsing and dataset aggregation.

Per-design metrics live next to the design as data_hls.json, data_impl.json
and data_execution.json. Aggregation walks every ``*__post_frontend`` tree
under a work directory and flattens those files into a fixed 30-column table;
a section whose file is absent (tool skipped, timed out, failed) leaves its
columns null. Failures are data: they keep their row.
"""

from __future__ import annotations

import csv
import io
import json
import zipfile
from dataclasses import asdict, dataclass
from pathlib import Path
from xml.etree import ElementTree

from .core import DESIGN_DATA_FILENAME, POST_FRONTEND_SUFFIX
from .errors import (
    MalformedReport,
    MalformedSpec,
    MissingDirectory,
    MissingField,
    SourceUnreadable,
)

CSYNTH_REPORT_RELPATH = "hls_prj/solution1/syn/report/csynth.xml"
IMPL_REPORT_RELPATH = "hls_prj/impl_report.json"
HLS_DATA_FILENAME = "data_hls.json"
IMPL_DATA_FILENAME = "data_impl.json"
EXECUTION_DATA_FILENAME = "data_execution.json"
SCHEMA_VERSION = 1

_UNDEF_TOKENS = {"", "undef", "undefined", "n/a"}


@dataclass(frozen=True)
class HlsSynthMetrics:
    """Synthesis estimates; latencies are null when the tool reports undef."""

    latency_best_cycles: int | None
    latency_avg_cycles: int | None
    latency_worst_cycles: int | None
    ii: int | None
    clock_estimate_ns: float
    lut: int
    ff: int
    dsp: int
    bram: int
    uram: int


@dataclass(frozen=True)
class ImplMetrics:
    wns_ns: float
    whs_ns: float
    lut: int
    ff: int
    dsp: int
    bram: int
    total_power_w: float


@dataclass(frozen=True)
class ExecutionMeta:
    tool_name: str
    tool_version: str
    runtime_s: float
    status: str


@dataclass
class MetricsBundle:
    hls: HlsSynthMetrics | None = None
    impl: ImplMetrics | None = None
    execution: ExecutionMeta | None = None


# Column order is the table schema; exports and imports key off these names.
IDENTITY_COLUMNS = ("design_id", "base_name", "dataset", "vendor")
ASSIGNMENT_COLUMNS = ("assignment_summary", "n_directives", "max_unroll", "n_unrolled",
                      "n_partitioned")
HLS_COLUMNS = ("hls_latency_best_cycles", "hls_latency_avg_cycles", "hls_latency_worst_cycles",
               "hls_ii", "hls_clock_estimate_ns", "hls_lut", "hls_ff", "hls_dsp", "hls_bram",
               "hls_uram")
IMPL_COLUMNS = ("impl_wns_ns", "impl_whs_ns", "impl_lut", "impl_ff", "impl_dsp", "impl_bram",
                "impl_total_power_w")
EXECUTION_COLUMNS = ("exec_tool_name", "exec_tool_version", "exec_runtime_s", "exec_status")
COLUMNS = IDENTITY_COLUMNS + ASSIGNMENT_COLUMNS + HLS_COLUMNS + IMPL_COLUMNS + EXECUTION_COLUMNS

_INT_COLUMNS = {
    "n_directives", "max_unroll", "n_unrolled", "n_partitioned",
    "hls_latency_best_cycles", "hls_latency_avg_cycles", "hls_latency_worst_cycles", "hls_ii",
    "hls_lut", "hls_ff", "hls_dsp", "hls_bram", "hls_uram",
    "impl_lut", "impl_ff", "impl_dsp", "impl_bram",
}
_FLOAT_COLUMNS = {"hls_clock_estimate_ns", "impl_wns_ns", "impl_whs_ns", "impl_total_power_w",
                  "exec_runtime_s"}


@dataclass
class AggregatedRow:
    """One design, flat; every column nullable so partial data stays honest."""

    design_id: str | None = None
    base_name: str | None = None
    dataset: str | None = None
    vendor: str | None = None
    assignment_summary: str | None = None
    n_directives: int | None = None
    max_unroll: int | None = None
    n_unrolled: int | None = None
    n_partitioned: int | None = None
    hls_latency_best_cycles: int | None = None
    hls_latency_avg_cycles: int | None = None
    hls_latency_worst_cycles: int | None = None
    hls_ii: int | None = None
    hls_clock_estimate_ns: float | None = None
    hls_lut: int | None = None
    hls_ff: int | None = None
    hls_dsp: int | None = None
    hls_bram: int | None = None
    hls_uram: int | None = None
    impl_wns_ns: float | None = None
    impl_whs_ns: float | None = None
    impl_lut: int | None = None
    impl_ff: int | None = None
    impl_dsp: int | None = None
    impl_bram: int | None = None
    impl_total_power_w: float | None = None
    exec_tool_name: str | None = None
    exec_tool_version: str | None = None
    exec_runtime_s: float | None = None
    exec_status: str | None = None

    @property
    def has_hls(self) -> bool:
        return self.hls_lut is not None

    @property
    def has_impl(self) -> bool:
        return self.impl_lut is not None

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in COLUMNS}


@dataclass
class AggregatedTable:
    rows: list[AggregatedRow]

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS


@dataclass
class ImportResult:
    rows: list[AggregatedRow]
    n_dropped: int


def _latency_value(text: str | None) -> int | None:
    if text is None or text.strip().lower() in _UNDEF_TOKENS:
        return None
    try:
        return int(text.strip())
    except ValueError as exc:
        raise MalformedReport(f"bad latency value {text!r}") from exc


def _resource_value(node, tag: str) -> int:
    text = node.findtext(tag)
    if text is None or text.strip() == "":
        return 0
    try:
        return int(text.strip())
    except ValueError as exc:
        raise MalformedReport(f"bad resource value {text!r} for {tag}") from exc


def parse_vitis_csynth_report(xml_text: str) -> HlsSynthMetrics:
    """Parse a csynth.xml report; one parser serves mock and real reports."""
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise MalformedReport(f"csynth report is not well-formed XML: {exc}") from exc
    area = root.find("AreaEstimates")
    if area is None:
        raise MalformedReport("csynth report lacks AreaEstimates")
    resources = area.find("Resources")
    if resources is None:
        raise MalformedReport("csynth report lacks AreaEstimates/Resources")
    latency = root.find("PerformanceEstimates/SummaryOfOverallLatency")
    best = avg = worst = ii = None
    if latency is not None:
        best = _latency_value(latency.findtext("Best-caseLatency"))
        avg = _latency_value(latency.findtext("Average-caseLatency"))
        worst = _latency_value(latency.findtext("Worst-caseLatency"))
        ii = _latency_value(latency.findtext("Best-caseInterval"))
    clock_text = root.findtext("PerformanceEstimates/SummaryOfTimingAnalysis/EstimatedClockPeriod")
    try:
        clock = float(clock_text) if clock_text not in (None, "") else 0.0
    except ValueError as exc:
        raise MalformedReport(f"bad EstimatedClockPeriod {clock_text!r}") from exc
    return HlsSynthMetrics(
        latency_best_cycles=best, latency_avg_cycles=avg, latency_worst_cycles=worst, ii=ii,
        clock_estimate_ns=clock,
        lut=_resource_value(resources, "LUT"), ff=_resource_value(resources, "FF"),
        dsp=_resource_value(resources, "DSP"), bram=_resource_value(resources, "BRAM_18K"),
        uram=_resource_value(resources, "URAM"))


def parse_impl_report(json_text: str) -> ImplMetrics:
    try:
        payload = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise MalformedReport(f"impl report is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedReport("impl report must be a JSON object")
    for name in ("wns_ns", "whs_ns", "lut", "ff", "dsp", "bram", "total_power_w"):
        if name not in payload:
            raise MissingField(f"impl report lacks required field {name!r}")
    return ImplMetrics(
        wns_ns=float(payload["wns_ns"]), whs_ns=float(payload["whs_ns"]),
        lut=int(payload["lut"]), ff=int(payload["ff"]), dsp=int(payload["dsp"]),
        bram=int(payload["bram"]), total_power_w=float(payload["total_power_w"]))


def write_standard_json(design_dir: Path, bundle: MetricsBundle) -> list[Path]:
    """Write data_hls/impl/execution.json for the bundle's present sections."""
    design_dir = Path(design_dir)
    written = []
    for section, filename in ((bundle.hls, HLS_DATA_FILENAME),
                              (bundle.impl, IMPL_DATA_FILENAME),
                              (bundle.execution, EXECUTION_DATA_FILENAME)):
        if section is None:
            continue
        path = design_dir / filename
        payload = {"schema_version": SCHEMA_VERSION, **asdict(section)}
        path.write_text(json.dumps(payload, indent=2) + "\n")
        written.append(path)
    return written


def _read_section(design_dir: Path, filename: str, cls):
    path = design_dir / filename
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text())
        payload.pop("schema_version", None)
        return cls(**payload)
    except (json.JSONDecodeError, TypeError, ValueError):
        # corrupted sidecar: treat the section as absent rather than sink the table
        return None


def read_standard_json(design_dir: Path) -> MetricsBundle:
    design_dir = Path(design_dir)
    return MetricsBundle(
        hls=_read_section(design_dir, HLS_DATA_FILENAME, HlsSynthMetrics),
        impl=_read_section(design_dir, IMPL_DATA_FILENAME, ImplMetrics),
        execution=_read_section(design_dir, EXECUTION_DATA_FILENAME, ExecutionMeta))


def _assignment_columns(entries: list[dict]) -> dict:
    parts = []
    max_unroll = 1
    n_unrolled = 0
    n_partitioned = 0
    for e in entries:
        choice = e.get("choice", "")
        shown = f"={choice}" if choice else ""
        parts.append(f"{e['group']}/{e['label']}#{e['line_index']}:{e['directive']}{shown}")
        if e["directive"] == "unroll":
            try:
                factor = int(choice)
            except ValueError:
                factor = 1
            max_unroll = max(max_unroll, factor)
            if factor > 1:
                n_unrolled += 1
        elif e["directive"] == "array_partition":
            n_partitioned += 1
    return {"assignment_summary": ";".join(parts), "n_directives": len(entries),
            "max_unroll": max_unroll, "n_unrolled": n_unrolled, "n_partitioned": n_partitioned}


def row_from_design_dir(design_dir: Path, dataset: str) -> AggregatedRow:
    """Flatten one design directory into a table row; absent files leave nulls."""
    design_dir = Path(design_dir)
    row = AggregatedRow(dataset=dataset)
    data_path = design_dir / DESIGN_DATA_FILENAME
    if data_path.exists():
        try:
            meta = json.loads(data_path.read_text())
            row.design_id = meta.get("id", design_dir.name)
            row.base_name = meta.get("base_name", design_dir.name.split("__")[0])
            row.vendor = meta.get("vendor")
            for key, value in _assignment_columns(meta.get("assignment", [])).items():
                setattr(row, key, value)
        except (json.JSONDecodeError, KeyError):
            row.design_id = design_dir.name
            row.base_name = design_dir.name.split("__")[0]
    else:
        row.design_id = design_dir.name
        row.base_name = design_dir.name.split("__")[0]
    bundle = read_standard_json(design_dir)
    if bundle.hls is not None:
        row.hls_latency_best_cycles = bundle.hls.latency_best_cycles
        row.hls_latency_avg_cycles = bundle.hls.latency_avg_cycles
        row.hls_latency_worst_cycles = bundle.hls.latency_worst_cycles
        row.hls_ii = bundle.hls.ii
        row.hls_clock_estimate_ns = bundle.hls.clock_estimate_ns
        row.hls_lut = bundle.hls.lut
        row.hls_ff = bundle.hls.ff
        row.hls_dsp = bundle.hls.dsp
        row.hls_bram = bundle.hls.bram
        row.hls_uram = bundle.hls.uram
    if bundle.impl is not None:
        row.impl_wns_ns = bundle.impl.wns_ns
        row.impl_whs_ns = bundle.impl.whs_ns
        row.impl_lut = bundle.impl.lut
        row.impl_ff = bundle.impl.ff
        row.impl_dsp = bundle.impl.dsp
        row.impl_bram = bundle.impl.bram
        row.impl_total_power_w = bundle.impl.total_power_w
    if bundle.execution is not None:
        row.exec_tool_name = bundle.execution.tool_name
        row.exec_tool_version = bundle.execution.tool_version
        row.exec_runtime_s = bundle.execution.runtime_s
        row.exec_status = bundle.execution.status
    return row


def aggregate_collection(work_dir: Path) -> AggregatedTable:
    """One row per design directory under every *__post_frontend tree, sorted."""
    work_dir = Path(work_dir)
    if not work_dir.is_dir():
        raise MissingDirectory(f"work directory {work_dir} does not exist")
    rows = []
    for pf_dir in sorted(work_dir.glob(f"*{POST_FRONTEND_SUFFIX}")):
        if not pf_dir.is_dir():
            continue
        for sub in sorted(p for p in pf_dir.iterdir() if p.is_dir()):
            rows.append(row_from_design_dir(sub, dataset=pf_dir.name))
    return AggregatedTable(rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_tabular(table: AggregatedTable, path: Path, format: str = "csv") -> Path:
    """Write the table as csv or jsonl; repeated exports are byte-identical."""
    path = Path(path)
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in table.rows:
            writer.writerow([_cell(getattr(row, name)) for name in COLUMNS])
        path.write_text(buf.getvalue())
    elif format == "jsonl":
        lines = [json.dumps({"schema_version": SCHEMA_VERSION, **row.as_dict()})
                 for row in table.rows]
        path.write_text("".join(line + "\n" for line in lines))
    else:
        raise ValueError(f"unknown export format {format!r}")
    return path


def _coerce(column: str, value):
    if value is None or value == "":
        return None
    if column in _INT_COLUMNS:
        return int(float(value))
    if column in _FLOAT_COLUMNS:
        return float(value)
    return str(value)


def load_table(path: Path) -> AggregatedTable:
    """Read back a csv/jsonl export (column types restored from the schema)."""
    path = Path(path)
    if not path.exists():
        raise SourceUnreadable(f"table file {path} does not exist")
    rows = []
    if path.suffix == ".jsonl":
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            payload = json.loads(line)
            payload.pop("schema_version", None)
            row = AggregatedRow()
            for name in COLUMNS:
                setattr(row, name, _coerce(name, payload.get(name)))
            rows.append(row)
    else:
        with path.open(newline="") as handle:
            for record in csv.DictReader(handle):
                row = AggregatedRow()
                for name in COLUMNS:
                    setattr(row, name, _coerce(name, record.get(name)))
                rows.append(row)
    return AggregatedTable(rows)


_UNIT_RULES = ("identity", "mhz_to_ns", "ns_to_mhz")


def _apply_unit(rule: str, value: float) -> float:
    if rule == "identity":
        return value
    # period[ns] = 1000 / freq[MHz], and the inverse is the same expression
    if value == 0:
        raise ValueError("cannot convert a zero frequency/period")
    return 1000.0 / value


def import_external_dataset(mapping_spec: dict, path: Path) -> ImportResult:
    """Map an external csv/json results file onto the standard table schema.

    Nothing is fabricated: only mapped columns become non-null, rows whose
    mapped cells fail to parse are dropped (and counted), and every row's
    dataset is tagged external:<name>.
    """
    if not isinstance(mapping_spec, dict):
        raise MalformedSpec("mapping spec must be a JSON object")
    for required in ("name", "format", "columns"):
        if required not in mapping_spec:
            raise MalformedSpec(f"mapping spec lacks required field {required!r}")
    name = mapping_spec["name"]
    fmt = mapping_spec["format"]
    columns = mapping_spec["columns"]
    units = mapping_spec.get("units", {})
    if fmt not in ("csv", "json"):
        raise MalformedSpec(f"unknown source format {fmt!r}")
    if not isinstance(columns, dict) or not columns:
        raise MalformedSpec("columns must be a non-empty object of src -> dst")
    for src, dst in columns.items():
        if dst not in COLUMNS:
            raise MalformedSpec(f"unknown target column {dst!r} (from source {src!r})")
    for dst, rule in units.items():
        if dst not in COLUMNS:
            raise MalformedSpec(f"units entry names unknown column {dst!r}")
        if rule not in _UNIT_RULES:
            raise MalformedSpec(f"unknown unit rule {rule!r} for column {dst!r}")

    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SourceUnreadable(f"cannot read {path}: {exc}") from exc
    if fmt == "csv":
        with io.StringIO(text) as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            for src in columns:
                if src not in header:
                    raise MalformedSpec(f"source column {src!r} not present in {path.name}")
            records = list(reader)
    else:
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SourceUnreadable(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, list):
            raise MalformedSpec("json source must be an array of objects")
        records = payload
        if records:
            for src in columns:
                if src not in records[0]:
                    raise MalformedSpec(f"source column {src!r} not present in {path.name}")

    rows = []
    n_dropped = 0
    for i, record in enumerate(records):
        row = AggregatedRow(dataset=f"external:{name}")
        try:
            for src, dst in columns.items():
                raw = record.get(src)
                if raw is None or raw == "":
                    setattr(row, dst, None)
                    continue
                if dst in units and dst in _FLOAT_COLUMNS | _INT_COLUMNS:
                    converted = _apply_unit(units[dst], float(raw))
                    value = int(round(converted)) if dst in _INT_COLUMNS else converted
                else:
                    value = _coerce(dst, raw)
                setattr(row, dst, value)
        except (ValueError, TypeError):
            n_dropped += 1
            continue
        if row.design_id is None:
            row.design_id = f"{name}_{i:06d}"
        if row.dataset != f"external:{name}":
            row.dataset = f"external:{name}"
        rows.append(row)
    return ImportResult(rows, n_dropped)


_SOURCE_ARCHIVE_SUFFIXES = (".c", ".cc", ".cpp", ".cxx", ".h", ".hpp", ".cl", ".tcl")


def archive_dataset(work_dir: Path, out_path: Path, include_artifacts: bool = False) -> Path:
    """Zip the work tree's data files deterministically (sorted, zeroed timestamps)."""
    work_dir = Path(work_dir)
    if not work_dir.is_dir():
        raise MissingDirectory(f"work directory {work_dir} does not exist")
    members = []
    for path in work_dir.rglob("*"):
        if not path.is_file():
            continue
        rel = path.relative_to(work_dir).as_posix()
        name = path.name
        in_artifacts = "hls_prj" in path.relative_to(work_dir).parts
        wanted = (name == "timeline.json"
                  or (name.startswith("data_") and name.endswith(".json"))
                  or name == "opt.tcl"
                  or path.suffix in _SOURCE_ARCHIVE_SUFFIXES)
        if in_artifacts:
            wanted = include_artifacts
        if wanted:
            members.append(rel)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out_path, "w") as zf:
        for rel in sorted(members):
            info = zipfile.ZipInfo(rel, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = 0o644 << 16
            info.create_system = 3
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, (work_dir / rel).read_bytes(), compresslevel=6)
    return out_path
