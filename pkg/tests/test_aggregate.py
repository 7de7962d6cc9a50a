"""Report parsing, the flat table, exports, imports, and archiving."""

from __future__ import annotations

import json
import zipfile

import pytest

from hlsforge.aggregate import (
    COLUMNS,
    AggregatedRow,
    AggregatedTable,
    ExecutionMeta,
    HlsSynthMetrics,
    ImplMetrics,
    MetricsBundle,
    aggregate_collection,
    archive_dataset,
    export_tabular,
    import_external_dataset,
    load_table,
    parse_impl_report,
    parse_vitis_csynth_report,
    read_standard_json,
    row_from_design_dir,
    write_standard_json,
)
from hlsforge.errors import MalformedReport, MalformedSpec, MissingDirectory, MissingField, SourceUnreadable

GOOD_XML = """\
<?xml version="1.0"?>
<profile>
  <PerformanceEstimates>
    <SummaryOfOverallLatency>
      <Best-caseLatency>10</Best-caseLatency>
      <Average-caseLatency>12</Average-caseLatency>
      <Worst-caseLatency>20</Worst-caseLatency>
      <Best-caseInterval>3</Best-caseInterval>
    </SummaryOfOverallLatency>
    <SummaryOfTimingAnalysis>
      <EstimatedClockPeriod>3.4</EstimatedClockPeriod>
    </SummaryOfTimingAnalysis>
  </PerformanceEstimates>
  <AreaEstimates>
    <Resources>
      <LUT>600</LUT>
      <FF>380</FF>
      <DSP>4</DSP>
      <BRAM_18K>1</BRAM_18K>
      <URAM>0</URAM>
    </Resources>
  </AreaEstimates>
</profile>
"""


def test_parse_csynth_report():
    metrics = parse_vitis_csynth_report(GOOD_XML)
    assert metrics == HlsSynthMetrics(10, 12, 20, 3, 3.4, 600, 380, 4, 1, 0)


def test_parse_csynth_undef_latency_is_null():
    xml = GOOD_XML.replace("<Best-caseLatency>10</Best-caseLatency>",
                           "<Best-caseLatency>undef</Best-caseLatency>")
    assert parse_vitis_csynth_report(xml).latency_best_cycles is None


def test_parse_csynth_missing_resource_defaults_to_zero():
    xml = GOOD_XML.replace("<URAM>0</URAM>", "")
    assert parse_vitis_csynth_report(xml).uram == 0


def test_parse_csynth_missing_interval_is_null():
    xml = GOOD_XML.replace("<Best-caseInterval>3</Best-caseInterval>", "")
    assert parse_vitis_csynth_report(xml).ii is None


def test_parse_csynth_rejects_malformed():
    with pytest.raises(MalformedReport):
        parse_vitis_csynth_report("<profile><unclosed>")
    with pytest.raises(MalformedReport):
        parse_vitis_csynth_report("<profile/>")
    with pytest.raises(MalformedReport):
        parse_vitis_csynth_report(GOOD_XML.replace("<LUT>600</LUT>", "<LUT>lots</LUT>"))


def test_parse_impl_report():
    payload = {"wns_ns": 6.5, "whs_ns": 0.1, "lut": 540, "ff": 342, "dsp": 4, "bram": 1,
               "total_power_w": 0.51}
    metrics = parse_impl_report(json.dumps(payload))
    assert metrics == ImplMetrics(6.5, 0.1, 540, 342, 4, 1, 0.51)
    with pytest.raises(MissingField):
        parse_impl_report(json.dumps({"wns_ns": 1.0}))
    with pytest.raises(MalformedReport):
        parse_impl_report("{bad json")
    with pytest.raises(MalformedReport):
        parse_impl_report("[1, 2]")


def sample_bundle() -> MetricsBundle:
    return MetricsBundle(
        hls=HlsSynthMetrics(10, 12, 20, None, 3.4, 600, 380, 4, 1, 0),
        impl=ImplMetrics(6.5, 0.1, 540, 342, 4, 1, 0.51),
        execution=ExecutionMeta("mock_hls_synth", "mock-2023.1", 0.0196, "ok"))


def test_standard_json_round_trip(tmp_path):
    bundle = sample_bundle()
    written = write_standard_json(tmp_path, bundle)
    assert [p.name for p in written] == ["data_hls.json", "data_impl.json", "data_execution.json"]
    assert read_standard_json(tmp_path) == bundle


def test_standard_json_partial_bundle(tmp_path):
    bundle = MetricsBundle(hls=sample_bundle().hls)
    write_standard_json(tmp_path, bundle)
    loaded = read_standard_json(tmp_path)
    assert loaded.hls == bundle.hls
    assert loaded.impl is None
    assert loaded.execution is None


def test_corrupted_section_reads_as_absent(tmp_path):
    write_standard_json(tmp_path, sample_bundle())
    (tmp_path / "data_impl.json").write_text("{definitely broken")
    loaded = read_standard_json(tmp_path)
    assert loaded.impl is None
    assert loaded.hls is not None


def make_design_dir(tmp_path, name="d__12345678", with_meta=True, bundle=None):
    d = tmp_path / name
    d.mkdir(parents=True, exist_ok=True)
    if with_meta:
        (d / "data_design.json").write_text(json.dumps({
            "base_name": "d", "id": name, "vendor": "xilinx",
            "assignment": [
                {"group": "g", "label": "lp1", "line_index": 0, "directive": "pipeline",
                 "choice": ""},
                {"group": "g", "label": "lp1", "line_index": 0, "directive": "unroll",
                 "choice": "4"},
                {"group": "g", "label": "buf", "line_index": 1, "directive": "array_partition",
                 "choice": "cyclic-2"},
            ]}))
    if bundle is not None:
        write_standard_json(d, bundle)
    return d


def test_row_from_design_dir_full(tmp_path):
    d = make_design_dir(tmp_path, bundle=sample_bundle())
    row = row_from_design_dir(d, dataset="ds__post_frontend")
    assert row.design_id == "d__12345678"
    assert row.base_name == "d"
    assert row.vendor == "xilinx"
    assert row.assignment_summary == ("g/lp1#0:pipeline;g/lp1#0:unroll=4;"
                                      "g/buf#1:array_partition=cyclic-2")
    assert row.n_directives == 3
    assert row.max_unroll == 4
    assert row.n_unrolled == 1
    assert row.n_partitioned == 1
    assert row.hls_lut == 600
    assert row.hls_ii is None
    assert row.impl_wns_ns == 6.5
    assert row.exec_status == "ok"
    assert row.has_hls and row.has_impl


def test_row_without_metadata_falls_back_to_dirname(tmp_path):
    d = make_design_dir(tmp_path, name="plain__deadbeef", with_meta=False)
    row = row_from_design_dir(d, dataset="ds")
    assert row.design_id == "plain__deadbeef"
    assert row.base_name == "plain"
    assert row.vendor is None
    assert not row.has_hls
    assert all(getattr(row, c) is None for c in COLUMNS if c not in ("design_id", "base_name",
                                                                     "dataset"))


def test_aggregate_collection_walks_post_frontend_trees(tmp_path):
    work = tmp_path / "work"
    pf = work / "ds__post_frontend"
    make_design_dir(pf, name="b__22222222", bundle=sample_bundle())
    make_design_dir(pf, name="a__11111111", with_meta=False)
    (work / "not_a_tree").mkdir()
    table = aggregate_collection(work)
    assert [r.design_id for r in table.rows] == ["a__11111111", "b__22222222"]
    assert all(r.dataset == "ds__post_frontend" for r in table.rows)
    with pytest.raises(MissingDirectory):
        aggregate_collection(tmp_path / "missing")


def test_export_and_load_round_trip(tmp_path):
    pf = tmp_path / "work" / "ds__post_frontend"
    make_design_dir(pf, name="a__11111111", bundle=sample_bundle())
    make_design_dir(pf, name="b__22222222", with_meta=False)
    table = aggregate_collection(tmp_path / "work")

    for fmt, name in (("csv", "t.csv"), ("jsonl", "t.jsonl")):
        out = export_tabular(table, tmp_path / name, format=fmt)
        loaded = load_table(out)
        assert [r.as_dict() for r in loaded.rows] == [r.as_dict() for r in table.rows]

    with pytest.raises(ValueError):
        export_tabular(table, tmp_path / "t.xml", format="xml")
    with pytest.raises(SourceUnreadable):
        load_table(tmp_path / "missing.csv")


def test_exports_are_byte_stable(tmp_path):
    pf = tmp_path / "work" / "ds__post_frontend"
    make_design_dir(pf, name="a__11111111", bundle=sample_bundle())
    table = aggregate_collection(tmp_path / "work")
    a = export_tabular(table, tmp_path / "a.csv").read_bytes()
    b = export_tabular(table, tmp_path / "b.csv").read_bytes()
    assert a == b
    ja = export_tabular(table, tmp_path / "a.jsonl", format="jsonl").read_bytes()
    jb = export_tabular(table, tmp_path / "b.jsonl", format="jsonl").read_bytes()
    assert ja == jb


def test_csv_preserves_float_precision(tmp_path):
    row = AggregatedRow(design_id="x", impl_wns_ns=6.2268816758427805,
                        exec_runtime_s=0.1 + 0.2)
    out = export_tabular(AggregatedTable([row]), tmp_path / "t.csv")
    loaded = load_table(out)
    assert loaded.rows[0].impl_wns_ns == 6.2268816758427805
    assert loaded.rows[0].exec_runtime_s == 0.1 + 0.2


def test_import_external_csv_with_units(tmp_path):
    src = tmp_path / "ext.csv"
    src.write_text("kernel,luts,fmax_mhz,latency\n"
                   "gemm0,1200,250,900\n"
                   "gemm1,not_a_number,250,901\n"
                   "gemm2,1400,,902\n")
    spec = {
        "name": "vendor_suite", "format": "csv",
        "columns": {"kernel": "design_id", "luts": "hls_lut",
                    "fmax_mhz": "hls_clock_estimate_ns", "latency": "hls_latency_avg_cycles"},
        "units": {"hls_clock_estimate_ns": "mhz_to_ns"},
    }
    result = import_external_dataset(spec, src)
    assert result.n_dropped == 1  # the unparsable luts row
    assert len(result.rows) == 2
    first = result.rows[0]
    assert first.design_id == "gemm0"
    assert first.dataset == "external:vendor_suite"
    assert first.hls_lut == 1200
    assert first.hls_clock_estimate_ns == 4.0  # 1000 / 250 MHz
    assert result.rows[1].hls_clock_estimate_ns is None  # empty cell stays null


def test_import_external_json_and_generated_ids(tmp_path):
    src = tmp_path / "ext.json"
    src.write_text(json.dumps([{"area": 500}, {"area": 600}]))
    spec = {"name": "js", "format": "json", "columns": {"area": "impl_lut"}}
    result = import_external_dataset(spec, src)
    assert [r.design_id for r in result.rows] == ["js_000000", "js_000001"]
    assert [r.impl_lut for r in result.rows] == [500, 600]


def test_import_spec_validation(tmp_path):
    src = tmp_path / "ext.csv"
    src.write_text("a\n1\n")
    with pytest.raises(MalformedSpec):
        import_external_dataset({"format": "csv", "columns": {"a": "hls_lut"}}, src)
    with pytest.raises(MalformedSpec):
        import_external_dataset({"name": "x", "format": "xlsx", "columns": {"a": "hls_lut"}}, src)
    with pytest.raises(MalformedSpec):
        import_external_dataset({"name": "x", "format": "csv", "columns": {"a": "nope"}}, src)
    with pytest.raises(MalformedSpec):
        import_external_dataset({"name": "x", "format": "csv", "columns": {"missing": "hls_lut"}},
                                src)
    with pytest.raises(MalformedSpec):
        import_external_dataset({"name": "x", "format": "csv", "columns": {"a": "hls_lut"},
                                 "units": {"hls_lut": "parsecs"}}, src)
    with pytest.raises(SourceUnreadable):
        import_external_dataset({"name": "x", "format": "csv", "columns": {"a": "hls_lut"}},
                                tmp_path / "missing.csv")


def populate_work_tree(tmp_path):
    work = tmp_path / "work"
    pf = work / "ds__post_frontend"
    d = make_design_dir(pf, name="a__11111111", bundle=sample_bundle())
    (d / "a.c").write_text("int main(void) { return 0; }\n")
    (d / "opt.tcl").write_text("set_directive_pipeline top/lp\n")
    (d / "run.log").write_text("noise\n")
    prj = d / "hls_prj" / "solution1" / "syn" / "report"
    prj.mkdir(parents=True)
    (prj / "csynth.xml").write_text(GOOD_XML)
    (work / "timeline.json").write_text("[]\n")
    return work


def test_archive_selects_data_files(tmp_path):
    work = populate_work_tree(tmp_path)
    out = archive_dataset(work, tmp_path / "out.zip")
    with zipfile.ZipFile(out) as zf:
        names = set(zf.namelist())
    base = "ds__post_frontend/a__11111111"
    assert f"{base}/data_hls.json" in names
    assert f"{base}/data_design.json" in names
    assert f"{base}/a.c" in names
    assert f"{base}/opt.tcl" in names
    assert "timeline.json" in names
    assert f"{base}/run.log" not in names
    assert not any("hls_prj" in n for n in names)


def test_archive_can_include_artifacts(tmp_path):
    work = populate_work_tree(tmp_path)
    out = archive_dataset(work, tmp_path / "full.zip", include_artifacts=True)
    with zipfile.ZipFile(out) as zf:
        names = set(zf.namelist())
    assert "ds__post_frontend/a__11111111/hls_prj/solution1/syn/report/csynth.xml" in names


def test_archive_is_deterministic(tmp_path):
    work = populate_work_tree(tmp_path)
    a = archive_dataset(work, tmp_path / "a.zip").read_bytes()
    b = archive_dataset(work, tmp_path / "b.zip").read_bytes()
    assert a == b
    with pytest.raises(MissingDirectory):
        archive_dataset(tmp_path / "missing", tmp_path / "c.zip")
