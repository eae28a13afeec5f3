import importlib.util
import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

_spec = importlib.util.spec_from_file_location("export_eigencloud", ROOT / "scripts" / "export_eigencloud.py")
export_eigencloud = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(export_eigencloud)


def test_shipped_batch_loads():
    entries = export_eigencloud.load_batch(export_eigencloud.DEFAULT_BATCH)
    assert {entry["name"] for entry in entries} >= {"j-form-compact", "rotation"}


def test_load_batch_rejects_bad_shapes(tmp_path):
    path = tmp_path / "batch.json"
    path.write_text(json.dumps({"name": "x"}), encoding="utf-8")
    with pytest.raises(RuntimeError):
        export_eigencloud.load_batch(path)

    path.write_text(json.dumps([{"name": "x"}]), encoding="utf-8")
    with pytest.raises(RuntimeError, match="missing"):
        export_eigencloud.load_batch(path)


def test_export_batch_writes_csv_and_skips_bad_entries(tmp_path):
    entries = [
        {"name": "identity", "map": "identity"},
        {"name": "escapes", "map": "lf:2,0,0,1"},
        {"name": "garbled", "psi": "spiral", "map": "identity"},
    ]
    index = export_eigencloud.export_batch(entries, tmp_path, 8)

    assert index[0] == {"name": "identity", "csv": "identity.csv", "rows": 8, "converged": True}
    lines = (tmp_path / "identity.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "re,im"
    assert len(lines) == 9
    assert [item["name"] for item in index[1:]] == ["escapes", "garbled"]
    assert all("error" in item for item in index[1:])
    assert not (tmp_path / "escapes.csv").exists()
