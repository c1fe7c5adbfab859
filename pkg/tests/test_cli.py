import csv
import io
import json

import cv2
import pytest

from conftest import write_png
from hazefuse import FusionConfig, load_pair, rgb_to_ycbcr
from hazefuse.cli import (
    ReportRecord,
    emit_table,
    main,
    read_manifest,
    run_batch,
    run_single,
)
from hazefuse.errors import DecodeError, ManifestParseError
from hazefuse.metrics import MetricsReport


def write_manifest(path, rows, header="rgb,nir,out,label"):
    lines = [header] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def _metrics(value):
    return MetricsReport(*([value] * 8))


# -- single ----------------------------------------------------------------


def test_run_single_writes_png_and_record(tmp_path, synthetic_files):
    rgb, nir = synthetic_files()
    out = tmp_path / "out.png"
    rec = run_single(rgb, nir, out, FusionConfig())
    assert out.read_bytes().startswith(b"\x89PNG")
    assert cv2.imread(str(out)).shape == (96, 128, 3)
    assert rec.ok and rec.metrics.sigma_sat == 0.0
    assert rec.to_json()["config"] == {"levels": 2, "haze_map": "scale", "bins": 256}


def test_self_fusion_keeps_image(tmp_path, synthetic_files):
    rgb, _ = synthetic_files()
    luma = rgb_to_ycbcr(load_pair(rgb, rgb).rgb).y
    nir = write_png(tmp_path / "luma_nir.png", luma)
    rec = run_single(rgb, nir, tmp_path / "out.png")
    assert rec.metrics.ssim >= 0.99


def test_missing_nir_names_path(tmp_path, synthetic_files):
    rgb, _ = synthetic_files()
    with pytest.raises(DecodeError, match="missing_nir.png"):
        run_single(rgb, tmp_path / "missing_nir.png", tmp_path / "out.png")


def test_report_appends(tmp_path, synthetic_files):
    rgb, nir = synthetic_files()
    report = tmp_path / "report.json"
    run_single(rgb, nir, tmp_path / "a.png", report_path=report, label="a")
    run_single(rgb, nir, tmp_path / "b.png", report_path=report, label="b")
    data = json.loads(report.read_text())
    assert [r["label"] for r in data] == ["a", "b"]
    assert set(data[0]) == {"label", "config", "metrics", "ms"}
    assert set(data[0]["metrics"]) == set(MetricsReport.FIELDS)


# -- manifest --------------------------------------------------------------


def test_manifest_relative_paths(tmp_path):
    m = write_manifest(tmp_path / "m.csv", [("a_rgb.png", "a_nir.png", "out/a.png", "a")])
    entry = read_manifest(m).entries[0]
    assert entry.rgb == tmp_path / "a_rgb.png" and entry.label == "a"


def test_manifest_label_optional(tmp_path):
    m = write_manifest(tmp_path / "m.csv", [("a.png", "b.png", "c.png")], header="rgb,nir,out")
    assert read_manifest(m).entries[0].label is None


@pytest.mark.parametrize(
    "header, rows",
    [
        ("rgb,nir", [("a", "b")]),
        ("rgb,nir,out,extra", [("a", "b", "c", "d")]),
        ("rgb,nir,out,label", [("a", "", "c", "x")]),
        ("rgb,nir,out,label", [("a", "b", "c", "x"), ("d", "e", "f", "x")]),
        ("rgb,nir,out", [("a", "b", "c", "d")]),
    ],
)
def test_manifest_errors(tmp_path, header, rows):
    m = write_manifest(tmp_path / "m.csv", rows, header=header)
    with pytest.raises(ManifestParseError):
        read_manifest(m)


def test_missing_manifest(tmp_path):
    with pytest.raises(ManifestParseError):
        run_batch(tmp_path / "nope.csv", None)


# -- batch -----------------------------------------------------------------


def test_empty_manifest(tmp_path):
    m = write_manifest(tmp_path / "m.csv", [])
    report = tmp_path / "r.json"
    assert run_batch(m, report) == []
    assert json.loads(report.read_text()) == []
    assert main(["batch", "--manifest", str(m), "--report", str(report)]) == 0


def test_batch_with_one_bad_entry(tmp_path, synthetic_files):
    rows = []
    for i in range(2):
        rgb, nir = synthetic_files(f"s{i}", seed=i)
        rows.append((rgb.name, nir.name, f"s{i}_out.png", f"s{i}"))
    rows.append(("missing_rgb.png", rows[0][1], "bad_out.png", "bad"))
    m = write_manifest(tmp_path / "m.csv", rows)
    report = tmp_path / "r.json"
    records = run_batch(m, report, workers=2)
    assert [r.label for r in records] == ["s0", "s1", "bad"]
    assert [r.ok for r in records] == [True, True, False]
    data = json.loads(report.read_text())
    assert data[2]["metrics"] is None and "DecodeError" in data[2]["error"]
    assert main(["batch", "--manifest", str(m), "--report", str(report)]) != 0


def test_batch_independent_of_workers(tmp_path, synthetic_files):
    rows = []
    for i in range(4):
        rgb, nir = synthetic_files(f"p{i}", h=64, w=72, seed=10 + i)
        rows.append((rgb.name, nir.name, f"p{i}_out.png", f"p{i}"))
    m = write_manifest(tmp_path / "m.csv", rows)
    serial = run_batch(m, None, workers=1)
    parallel = run_batch(m, None, workers=4)
    strip = lambda recs: [{k: v for k, v in r.to_json().items() if k != "ms"} for r in recs]
    assert strip(serial) == strip(parallel)


def test_unlabelled_entries_use_relative_rgb_path(tmp_path, synthetic_files):
    rgb, nir = synthetic_files()
    m = write_manifest(tmp_path / "m.csv", [(rgb.name, nir.name, "o.png")], header="rgb,nir,out")
    assert run_batch(m, None)[0].label == rgb.name


def test_cli_single(tmp_path, synthetic_files, capsys):
    rgb, nir = synthetic_files()
    out, report = tmp_path / "o.png", tmp_path / "r.json"
    code = main(["--rgb", str(rgb), "--nir", str(nir), "--out", str(out),
                 "--levels", "3", "--haze-map", "minmax", "--bins", "128", "--report", str(report)])
    assert code == 0 and out.exists()
    printed = json.loads(capsys.readouterr().out)
    assert printed["config"] == {"levels": 3, "haze_map": "minmax", "bins": 128}
    assert json.loads(report.read_text())[0]["config"]["levels"] == 3


def test_cli_single_error(tmp_path, synthetic_files, capsys):
    rgb, _ = synthetic_files()
    code = main(["--rgb", str(rgb), "--nir", str(tmp_path / "x.png"), "--out", str(tmp_path / "o.png")])
    assert code == 1
    assert "x.png" in capsys.readouterr().err


def test_cli_batch_options_and_table(tmp_path, synthetic_files):
    rgb, nir = synthetic_files()
    m = write_manifest(tmp_path / "m.csv", [(rgb.name, nir.name, "o.png", "only")])
    report, table = tmp_path / "r.json", tmp_path / "t.csv"
    code = main(["--levels", "3", "batch", "--manifest", str(m), "--report", str(report),
                 "--table", str(table), "--bins", "64"])
    assert code == 0
    cfg = json.loads(report.read_text())[0]["config"]
    assert cfg == {"levels": 3, "haze_map": "scale", "bins": 64}
    assert table.read_text().startswith("label,levels,haze_map,bins,entropy")


def test_cli_requires_paths():
    with pytest.raises(SystemExit):
        main(["--rgb", "a.png"])


def test_cli_bad_manifest(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("foo,bar\n")
    assert main(["batch", "--manifest", str(m), "--report", str(tmp_path / "r.json")]) == 2


# -- table -----------------------------------------------------------------


def test_table_one_record():
    text = emit_table([ReportRecord("x", FusionConfig(), _metrics(0.5), 1.0)])
    lines = text.strip().splitlines()
    assert len(lines) == 2
    assert lines[0] == "label,levels,haze_map,bins,entropy,std_dev,ssim,cc,sf,e,sigma_sat,r_bar"
    assert lines[1] == "x,2,scale,256," + ",".join(["0.5000"] * 8)


def test_table_sorted_by_label():
    recs = [ReportRecord(lbl, FusionConfig(), _metrics(0.1), 0.0) for lbl in ("c", "a", "b")]
    rows = list(csv.DictReader(io.StringIO(emit_table(recs))))
    assert [r["label"] for r in rows] == ["a", "b", "c"]


def test_table_round_trip():
    m = MetricsReport(6.123456, 0.1, 0.98765, 0.5, 0.0333333, 0.621, 0.0, 1.80949)
    rows = list(csv.DictReader(io.StringIO(emit_table([ReportRecord("r", FusionConfig(), m, 0.0)]))))
    for k in MetricsReport.FIELDS:
        assert float(rows[0][k]) == pytest.approx(getattr(m, k), abs=5e-5)


def test_table_skips_failures_and_rejects_empty():
    ok = ReportRecord("ok", FusionConfig(), _metrics(1.0), 0.0)
    bad = ReportRecord("bad", FusionConfig(), None, 0.0, error="boom")
    assert "bad" not in emit_table([ok, bad])
    with pytest.raises(ValueError):
        emit_table([])
