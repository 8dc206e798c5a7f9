import csv

from file_handler import FileHandler


def test_json_round_trip(tmp_path):
    handler = FileHandler(str(tmp_path))
    ok, path, error = handler.write_json('nested/data.json', {"b": [1, 2], "a": 0.5})
    assert ok and error is None
    assert path == str(tmp_path / 'nested' / 'data.json')
    ok, payload, error = handler.read_json('nested/data.json')
    assert ok and payload == {"a": 0.5, "b": [1, 2]}


def test_read_failures(tmp_path):
    handler = FileHandler(str(tmp_path))
    ok, payload, error = handler.read_json('absent.json')
    assert not ok and payload is None and error.startswith("Read error")
    (tmp_path / 'broken.json').write_text('{"a": ')
    ok, _, error = handler.read_json('broken.json')
    assert not ok and error.startswith("Malformed JSON")


def test_write_json_rejects_unserializable(tmp_path):
    ok, path, error = FileHandler(str(tmp_path)).write_json('bad.json', {"x": object()})
    assert not ok and path is None and error.startswith("Write error")


def test_write_csv_uses_every_column(tmp_path):
    handler = FileHandler(str(tmp_path))
    ok, path, _ = handler.write_csv('rows.csv', [{"id": 0, "passed": True}, {"id": 1, "error": "boom"}])
    assert ok
    with open(path, newline='') as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["id", "passed", "error"]
    assert rows[0]["error"] == "" and rows[1]["passed"] == ""
