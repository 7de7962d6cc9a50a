"""Tool flows: a deterministic mock HLS/implementation pair plus adapters for
real vendor tools.

The mock flows read the design's mock_manifest.json and the directives the
frontend lowered (opt.tcl for xilinx trees, injected pragmas for intel trees)
and emit the same report files a real run would leave behind, so parsing and
aggregation exercise one code path. The cost model, per loop with trip count
T, body_ops B, mult_ops M and unroll factor U:

    cycles      = ceil(T/U) - 1 + B   if pipelined else ceil(T/U) * B
    latency_avg = sum over loops; best = avg; worst = 2 * avg
    lut         = base_lut + sum(lut_per_op * B * U)
    ff          = base_ff  + sum(ff_per_op * B * U)
    dsp         = sum(M * U)
    bram        = sum over arrays: ceil(depth * elem_bytes / bank_bytes) * banks
    clock_est   = clock_base_ns + clock_unroll_ns * log2(max U)

Implementation mock: each resource is round(impl_scale * hls value), wns_ns is
clock_target - clock_est - wns_lut_coeff * log2(1 + lut/1000), and power is
power_base_w + lut * power_lut_w + dsp * power_dsp_w.
"""

from __future__ import annotations

import json
import math
import os
import re
import shutil
import subprocess
import time
from dataclasses import dataclass, replace
from pathlib import Path
from xml.etree import ElementTree

from .aggregate import (
    CSYNTH_REPORT_RELPATH,
    IMPL_REPORT_RELPATH,
    HlsSynthMetrics,
    ImplMetrics,
    parse_vitis_csynth_report,
)
from .core import design_dir, design_identity, validate_design_files
from .errors import (
    ExecutableNotFound,
    HlsForgeError,
    LabelUnknown,
    ManifestMissing,
    SynthReportMissing,
)
from .frontends import ANCHOR_RE, MANIFEST_FILENAME, SOURCE_SUFFIXES

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_TIMEOUT = "timeout"
STATUS_SKIPPED = "skipped_missing_files"

KIND_MOCK_SYNTH = "mock_synth"
KIND_MOCK_IMPL = "mock_impl"
KIND_EXTERNAL = "external"

_PRAGMA_UNROLL_RE = re.compile(r"^\s*#pragma\s+unroll\s+(\d+)\s*$")
_NUMBANKS_RE = re.compile(r"^\s*hls_numbanks\((\d+)\)\s*$")
_BANKWIDTH_RE = re.compile(r"^\s*hls_bankwidth\((\d+)\)\s*$")


@dataclass(frozen=True)
class MockCostConstants:
    """Knobs of the mock cost model; vary them to emulate a tool version bump."""

    version: str = "mock-2023.1"
    lut_per_op: int = 25
    ff_per_op: int = 15
    bank_bytes: int = 2048
    clock_base_ns: float = 3.0
    clock_unroll_ns: float = 0.2
    impl_scale: float = 0.9
    wns_lut_coeff: float = 0.1
    whs_ns: float = 0.1
    power_base_w: float = 0.5
    power_lut_w: float = 1e-5
    power_dsp_w: float = 1e-3
    default_clock_target_ns: float = 10.0


@dataclass(frozen=True)
class LoopSpec:
    label: str
    trip_count: int
    body_ops: int
    mult_ops: int = 0


@dataclass(frozen=True)
class ArraySpec:
    label: str
    depth: int
    elem_bytes: int


@dataclass(frozen=True)
class MockManifest:
    """Workload description the mock cost model prices."""

    loops: tuple[LoopSpec, ...]
    arrays: tuple[ArraySpec, ...]
    base_lut: int
    base_ff: int
    clock_target_ns: float = 10.0

    @classmethod
    def load(cls, design_root: Path) -> "MockManifest":
        path = Path(design_root) / MANIFEST_FILENAME
        if not path.exists():
            raise ManifestMissing(f"{path} does not exist")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ManifestMissing(f"{path} is not valid JSON: {exc}") from exc
        for name in ("loops", "base_lut", "base_ff"):
            if name not in payload:
                raise ManifestMissing(f"{path} lacks required field {name!r}")
        try:
            loops = tuple(LoopSpec(label=l["label"], trip_count=int(l["trip_count"]),
                                   body_ops=int(l["body_ops"]), mult_ops=int(l.get("mult_ops", 0)))
                          for l in payload["loops"])
            arrays = tuple(ArraySpec(label=a["label"], depth=int(a["depth"]),
                                     elem_bytes=int(a["elem_bytes"]))
                           for a in payload.get("arrays", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestMissing(f"{path} has a malformed loop/array entry: {exc}") from exc
        return cls(loops=loops, arrays=arrays, base_lut=int(payload["base_lut"]),
                   base_ff=int(payload["base_ff"]),
                   clock_target_ns=float(payload.get("clock_target_ns", 10.0)))


@dataclass(frozen=True)
class ToolFlowSpec:
    """What to run per design: required inputs, how to run it, time budget."""

    name: str
    kind: str
    required_files: tuple[str, ...] = ()
    timeout_s: float = 3600.0
    environment: tuple[tuple[str, str], ...] = ()
    command_template: tuple[str, ...] = ()
    version_command: tuple[str, ...] = ()
    constants: MockCostConstants = MockCostConstants()


@dataclass(frozen=True)
class FlowOutcome:
    design_id: str
    flow_name: str
    status: str
    runtime_s: float
    log_path: Path | None


@dataclass(frozen=True)
class DirectiveProfile:
    """Directives recovered from a lowered design tree."""

    unroll: dict
    pipelined: frozenset
    banks: dict
    mode: str  # "tcl", "intel" or "bare"


def mock_synth_flow(timeout_s: float = 60.0,
                    constants: MockCostConstants = MockCostConstants()) -> ToolFlowSpec:
    return ToolFlowSpec(name="mock_hls_synth", kind=KIND_MOCK_SYNTH,
                        required_files=(MANIFEST_FILENAME,), timeout_s=timeout_s,
                        constants=constants)


def mock_impl_flow(timeout_s: float = 60.0,
                   constants: MockCostConstants = MockCostConstants()) -> ToolFlowSpec:
    return ToolFlowSpec(name="mock_impl", kind=KIND_MOCK_IMPL,
                        required_files=(MANIFEST_FILENAME, CSYNTH_REPORT_RELPATH),
                        timeout_s=timeout_s, constants=constants)


def _require_executable(executable: str) -> None:
    if shutil.which(executable) is None:
        raise ExecutableNotFound(f"{executable!r} not found on PATH")


def vitis_hls_synth_flow(executable: str = "vitis_hls", timeout_s: float = 3600.0,
                         environment: tuple[tuple[str, str], ...] = ()) -> ToolFlowSpec:
    _require_executable(executable)
    return ToolFlowSpec(name="vitis_hls_synth", kind=KIND_EXTERNAL,
                        required_files=("dataset_hls.tcl",), timeout_s=timeout_s,
                        environment=environment,
                        command_template=(executable, "-f", "dataset_hls.tcl"),
                        version_command=(executable, "-version"))


def vitis_hls_impl_flow(executable: str = "vitis_hls", timeout_s: float = 7200.0,
                        environment: tuple[tuple[str, str], ...] = ()) -> ToolFlowSpec:
    _require_executable(executable)
    return ToolFlowSpec(name="vitis_hls_impl", kind=KIND_EXTERNAL,
                        required_files=("dataset_hls_ip_export.tcl",), timeout_s=timeout_s,
                        environment=environment,
                        command_template=(executable, "-f", "dataset_hls_ip_export.tcl"),
                        version_command=(executable, "-version"))


def intel_hls_flow(executable: str = "i++", timeout_s: float = 3600.0,
                   command: tuple[str, ...] = (), environment: tuple[tuple[str, str], ...] = ()
                   ) -> ToolFlowSpec:
    # default command compiles every top-level .c/.cpp in the design dir
    _require_executable(executable)
    argv = command or (executable, "-march=FPGA", "--quartus-compile", "{sources}")
    return ToolFlowSpec(name="intel_hls", kind=KIND_EXTERNAL, required_files=(),
                        timeout_s=timeout_s, environment=environment, command_template=argv,
                        version_command=(executable, "--version"))


def custom_flow(name: str, command: tuple[str, ...], required_files: tuple[str, ...] = (),
                timeout_s: float = 3600.0, environment: tuple[tuple[str, str], ...] = ()
                ) -> ToolFlowSpec:
    """External flow around an arbitrary command; {design_dir} expands in argv."""
    _require_executable(command[0])
    return ToolFlowSpec(name=name, kind=KIND_EXTERNAL, required_files=required_files,
                        timeout_s=timeout_s, environment=environment, command_template=command)


_VERSION_CACHE: dict[tuple[str, ...], str] = {}


def tool_version(spec: ToolFlowSpec) -> str:
    """Mock flows report their constants' version; external tools are asked once."""
    if spec.kind in (KIND_MOCK_SYNTH, KIND_MOCK_IMPL):
        return spec.constants.version
    if not spec.version_command:
        return "unknown"
    if spec.version_command not in _VERSION_CACHE:
        try:
            proc = subprocess.run(spec.version_command, capture_output=True, text=True,
                                  timeout=30.0)
            first = next((line.strip() for line in (proc.stdout or proc.stderr).splitlines()
                          if line.strip()), "unknown")
        except (OSError, subprocess.SubprocessError):
            first = "unknown"
        _VERSION_CACHE[spec.version_command] = first
    return _VERSION_CACHE[spec.version_command]


def extract_directives(design_root: Path) -> DirectiveProfile:
    """Recover directives from opt.tcl, or from injected intel annotations.

    Trees with opt.tcl are read as Tcl set_directive commands. Otherwise, if
    any source carries an anchor comment the tree is treated as intel-lowered:
    pragmas following each anchor are read and every anchored loop counts as
    pipelined (the i++ default). A tree with neither yields no directives.
    """
    design_root = Path(design_root)
    opt_path = design_root / "opt.tcl"
    unroll: dict = {}
    pipelined: set = set()
    banks: dict = {}
    if opt_path.exists():
        for raw in opt_path.read_text().splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            command = tokens[0]
            if command not in ("set_directive_unroll", "set_directive_pipeline",
                               "set_directive_array_partition"):
                continue
            label = tokens[-1].split("/")[-1]
            if command == "set_directive_pipeline":
                pipelined.add(label)
                continue
            factor = 1
            if "-factor" in tokens:
                factor = int(tokens[tokens.index("-factor") + 1])
            if command == "set_directive_unroll":
                unroll[label] = factor
            else:
                banks[label] = factor
        return DirectiveProfile(unroll, frozenset(pipelined), banks, "tcl")

    anchored: list[tuple[str, list[str]]] = []
    for path in sorted(design_root.rglob("*")):
        if not path.is_file() or path.suffix not in SOURCE_SUFFIXES:
            continue
        lines = path.read_text().splitlines()
        for i, line in enumerate(lines):
            match = ANCHOR_RE.search(line)
            if match:
                anchored.append((match.group(1), lines[i + 1:]))
    if not anchored:
        return DirectiveProfile({}, frozenset(), {}, "bare")
    # intel trees carry no explicit pipeline marker; the cost model pipelines
    # every manifest loop when mode is "intel" (the i++ default)
    for label, following in anchored:
        for line in following:
            m = _PRAGMA_UNROLL_RE.match(line)
            if m:
                unroll[label] = int(m.group(1))
                continue
            m = _NUMBANKS_RE.match(line)
            if m:
                banks[label] = int(m.group(1))
                continue
            if _BANKWIDTH_RE.match(line):
                continue
            break  # annotations sit directly under the anchor
    return DirectiveProfile(unroll, frozenset(pipelined), banks, "intel")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def compute_mock_synth_metrics(manifest: MockManifest, profile: DirectiveProfile,
                               constants: MockCostConstants) -> HlsSynthMetrics:
    loop_labels = {loop.label for loop in manifest.loops}
    array_labels = {array.label for array in manifest.arrays}
    for label in sorted(set(profile.unroll) | set(profile.pipelined)):
        if label not in loop_labels:
            raise LabelUnknown(f"directive targets loop {label!r} not in the manifest")
    for label in sorted(profile.banks):
        if label not in array_labels:
            raise LabelUnknown(f"array_partition targets array {label!r} not in the manifest")

    pipelined = set(profile.pipelined)
    if profile.mode == "intel":
        pipelined |= loop_labels

    latency = 0
    lut = manifest.base_lut
    ff = manifest.base_ff
    dsp = 0
    max_unroll = 1
    for loop in manifest.loops:
        factor = profile.unroll.get(loop.label, 1)
        max_unroll = max(max_unroll, factor)
        iterations = _ceil_div(loop.trip_count, factor)
        if loop.label in pipelined:
            latency += iterations - 1 + loop.body_ops
        else:
            latency += iterations * loop.body_ops
        lut += constants.lut_per_op * loop.body_ops * factor
        ff += constants.ff_per_op * loop.body_ops * factor
        dsp += loop.mult_ops * factor
    bram = 0
    for array in manifest.arrays:
        bram += _ceil_div(array.depth * array.elem_bytes, constants.bank_bytes) \
            * profile.banks.get(array.label, 1)
    clock = constants.clock_base_ns + constants.clock_unroll_ns * math.log2(max_unroll)
    return HlsSynthMetrics(
        latency_best_cycles=latency, latency_avg_cycles=latency,
        latency_worst_cycles=2 * latency, ii=None, clock_estimate_ns=clock,
        lut=lut, ff=ff, dsp=dsp, bram=bram, uram=0)


def compute_mock_impl_metrics(hls: HlsSynthMetrics, clock_target_ns: float,
                              constants: MockCostConstants) -> ImplMetrics:
    wns = clock_target_ns - hls.clock_estimate_ns \
        - constants.wns_lut_coeff * math.log2(1 + hls.lut / 1000)
    power = constants.power_base_w + hls.lut * constants.power_lut_w \
        + hls.dsp * constants.power_dsp_w
    return ImplMetrics(
        wns_ns=wns, whs_ns=constants.whs_ns,
        lut=round(constants.impl_scale * hls.lut), ff=round(constants.impl_scale * hls.ff),
        dsp=round(constants.impl_scale * hls.dsp), bram=round(constants.impl_scale * hls.bram),
        total_power_w=power)


def _write_csynth_xml(path: Path, metrics: HlsSynthMetrics) -> None:
    def latency_text(value: int | None) -> str:
        return "undef" if value is None else str(value)

    root = ElementTree.Element("profile")
    perf = ElementTree.SubElement(root, "PerformanceEstimates")
    lat = ElementTree.SubElement(perf, "SummaryOfOverallLatency")
    ElementTree.SubElement(lat, "Best-caseLatency").text = latency_text(metrics.latency_best_cycles)
    ElementTree.SubElement(lat, "Average-caseLatency").text = latency_text(metrics.latency_avg_cycles)
    ElementTree.SubElement(lat, "Worst-caseLatency").text = latency_text(metrics.latency_worst_cycles)
    timing = ElementTree.SubElement(perf, "SummaryOfTimingAnalysis")
    ElementTree.SubElement(timing, "EstimatedClockPeriod").text = repr(metrics.clock_estimate_ns)
    area = ElementTree.SubElement(root, "AreaEstimates")
    resources = ElementTree.SubElement(area, "Resources")
    for tag, value in (("LUT", metrics.lut), ("FF", metrics.ff), ("DSP", metrics.dsp),
                       ("BRAM_18K", metrics.bram), ("URAM", metrics.uram)):
        ElementTree.SubElement(resources, tag).text = str(value)
    tree = ElementTree.ElementTree(root)
    ElementTree.indent(tree, space="  ")
    path.parent.mkdir(parents=True, exist_ok=True)
    tree.write(path, encoding="utf-8", xml_declaration=True)
    with path.open("a") as handle:
        handle.write("\n")


def simulated_runtime_s(lut: int, ff: int) -> float:
    """Deterministic stand-in runtime so mock runs reproduce byte-identically."""
    return round((lut + ff) / 50000.0, 6)


def mock_hls_synth(design, constants: MockCostConstants = MockCostConstants(),
                   flow_name: str = "mock_hls_synth") -> FlowOutcome:
    """Price the design and write hls_prj/solution1/syn/report/csynth.xml."""
    root = design_dir(design)
    start = time.monotonic()
    manifest = MockManifest.load(root)
    profile = extract_directives(root)
    metrics = compute_mock_synth_metrics(manifest, profile, constants)
    _write_csynth_xml(root / CSYNTH_REPORT_RELPATH, metrics)
    runtime = time.monotonic() - start
    log_path = root / f"{flow_name}.log"
    log_path.write_text(
        f"mock hls synth ({constants.version}) on {design_identity(design)}\n"
        f"directive source: {profile.mode}\n"
        f"unroll={dict(sorted(profile.unroll.items()))} "
        f"pipelined={sorted(profile.pipelined)} banks={dict(sorted(profile.banks.items()))}\n"
        f"latency_avg={metrics.latency_avg_cycles} lut={metrics.lut} ff={metrics.ff} "
        f"dsp={metrics.dsp} bram={metrics.bram} clock_estimate_ns={metrics.clock_estimate_ns}\n")
    return FlowOutcome(design_identity(design), flow_name, STATUS_OK, runtime, log_path)


def mock_impl(design, constants: MockCostConstants = MockCostConstants(),
              flow_name: str = "mock_impl") -> FlowOutcome:
    """Derive implementation results from the synthesis report."""
    root = design_dir(design)
    start = time.monotonic()
    report_path = root / CSYNTH_REPORT_RELPATH
    if not report_path.exists():
        raise SynthReportMissing(f"{report_path} does not exist; run synthesis first")
    hls = parse_vitis_csynth_report(report_path.read_text())
    manifest = MockManifest.load(root)
    metrics = compute_mock_impl_metrics(hls, manifest.clock_target_ns, constants)
    out_path = root / IMPL_REPORT_RELPATH
    out_path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"wns_ns": metrics.wns_ns, "whs_ns": metrics.whs_ns, "lut": metrics.lut,
               "ff": metrics.ff, "dsp": metrics.dsp, "bram": metrics.bram,
               "total_power_w": metrics.total_power_w}
    out_path.write_text(json.dumps(payload, indent=2) + "\n")
    runtime = time.monotonic() - start
    log_path = root / f"{flow_name}.log"
    log_path.write_text(
        f"mock impl ({constants.version}) on {design_identity(design)}\n"
        f"clock_target_ns={manifest.clock_target_ns} wns_ns={metrics.wns_ns} "
        f"lut={metrics.lut} ff={metrics.ff} power_w={metrics.total_power_w}\n")
    return FlowOutcome(design_identity(design), flow_name, STATUS_OK, runtime, log_path)


def _expand_argv(spec: ToolFlowSpec, root: Path) -> list[str]:
    argv: list[str] = []
    for token in spec.command_template:
        if token == "{sources}":
            argv.extend(sorted(str(p.name) for p in root.iterdir()
                               if p.suffix in (".c", ".cc", ".cpp", ".cxx")))
        else:
            argv.append(token.replace("{design_dir}", str(root)))
    return argv


def _run_external(spec: ToolFlowSpec, design, log_path: Path) -> FlowOutcome:
    root = design_dir(design)
    argv = _expand_argv(spec, root)
    env = {**os.environ, **dict(spec.environment)} if spec.environment else None
    start = time.monotonic()
    try:
        proc = subprocess.run(argv, cwd=root, capture_output=True, text=True,
                              timeout=spec.timeout_s, env=env)
        status = STATUS_OK if proc.returncode == 0 else STATUS_FAILED
        stdout, stderr = proc.stdout, proc.stderr
        tail = f"exit code {proc.returncode}"
    except subprocess.TimeoutExpired as exc:
        status = STATUS_TIMEOUT
        stdout = exc.stdout.decode(errors="replace") if isinstance(exc.stdout, bytes) \
            else (exc.stdout or "")
        stderr = exc.stderr.decode(errors="replace") if isinstance(exc.stderr, bytes) \
            else (exc.stderr or "")
        tail = f"timed out after {spec.timeout_s}s (process killed)"
    except OSError as exc:
        status = STATUS_FAILED
        stdout, stderr, tail = "", str(exc), "failed to launch"
    runtime = time.monotonic() - start
    log_path.write_text(
        f"command: {' '.join(argv)}\n--- stdout ---\n{stdout}\n--- stderr ---\n{stderr}\n{tail}\n")
    return FlowOutcome(design_identity(design), spec.name, status, runtime, log_path)


def run_flow(spec: ToolFlowSpec, design) -> FlowOutcome:
    """Run one flow on one design; failures become outcomes, never exceptions."""
    root = design_dir(design)
    log_path = root / f"{spec.name}.log"
    missing = validate_design_files(design, spec.required_files)
    if missing:
        log_path.write_text(f"skipped: required file(s) missing: {', '.join(missing)}\n")
        return FlowOutcome(design_identity(design), spec.name, STATUS_SKIPPED, 0.0, log_path)
    if spec.kind == KIND_EXTERNAL:
        return _run_external(spec, design, log_path)
    start = time.monotonic()
    try:
        if spec.kind == KIND_MOCK_SYNTH:
            return mock_hls_synth(design, spec.constants, spec.name)
        if spec.kind == KIND_MOCK_IMPL:
            return mock_impl(design, spec.constants, spec.name)
        raise ValueError(f"unknown flow kind {spec.kind!r}")
    except HlsForgeError as exc:
        runtime = time.monotonic() - start
        log_path.write_text(f"flow {spec.name} failed: {type(exc).__name__}: {exc}\n")
        return FlowOutcome(design_identity(design), spec.name, STATUS_FAILED, runtime, log_path)


def perturbed_constants(base: MockCostConstants = MockCostConstants(),
                        version: str = "mock-2024.1") -> MockCostConstants:
    """A second mock tool version with shifted area/timing behavior (for A/B runs)."""
    return replace(base, version=version,
                   lut_per_op=base.lut_per_op + 6, ff_per_op=base.ff_per_op + 4,
                   clock_unroll_ns=base.clock_unroll_ns + 0.1,
                   power_base_w=base.power_base_w + 0.2)
