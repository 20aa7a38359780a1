import json

from src.data.report_manager import INDEX_FILE, ReportManager, load_report, write_table


def test_save_report_and_index(tmp_path):
    manager = ReportManager(str(tmp_path))
    path = manager.save_report("dlc", {"compliance_pct": 97.5, "peak_r_ref_dps": 18.0}, {"mode": "emulated"})
    assert path == str(tmp_path / "dlc_report.json")
    report = load_report(path)
    assert report["compliance_pct"] == 97.5
    assert report["mode"] == "emulated"
    entry = manager.get_entry("dlc")
    assert entry == {"id": "dlc", "report": "dlc_report.json", "telemetry": "dlc.csv", "complies": True}


def test_rerun_replaces_entry(tmp_path):
    manager = ReportManager(str(tmp_path))
    manager.save_report("dlc", {"compliance_pct": 97.5})
    manager.save_report("weave", {"compliance_pct": 99.0})
    manager.save_report("dlc", {"compliance_pct": 80.0})
    index = ReportManager(str(tmp_path)).load_index()
    assert [item["id"] for item in index] == ["dlc", "weave"]
    assert index[0]["complies"] is False


def test_corrupt_index_is_rebuilt(tmp_path):
    (tmp_path / INDEX_FILE).write_text("{not json", encoding="utf-8")
    manager = ReportManager(str(tmp_path))
    assert manager.load_index() == []
    (tmp_path / INDEX_FILE).write_text(json.dumps({"id": "x"}), encoding="utf-8")
    assert manager.load_index() == []
    (tmp_path / INDEX_FILE).write_text(json.dumps([{"id": "x"}, {"no": "id"}]), encoding="utf-8")
    assert manager.load_index() == [{"id": "x"}]
    assert manager.get_entry("missing") is None


def test_write_table(tmp_path):
    path = str(tmp_path / "sub" / "spectrum.csv")
    write_table(path, ("frequency_hz", "amplitude"), [(0.0, 1.5), (0.1, 0.25)])
    lines = (tmp_path / "sub" / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines == ["frequency_hz,amplitude", "0.0,1.5", "0.1,0.25"]
