import json

import pytest

from jigsaw import io
from jigsaw.errors import ValidationError
from jigsaw.pmf import SparsePmf, marginalize


def test_marginal_counts_written_in_descending_qubit_layout(tmp_path):
    path = tmp_path / "m.json"
    # key "01" over (0, 2): qubit 0 reads 0, qubit 2 reads 1
    io.write_counts(path, {"01": 3, "10": 1}, 3, (0, 2))
    data = json.loads(path.read_text())
    assert data["qubits"] == [2, 0]
    assert data["counts"] == {"01": 1, "10": 3}
    m = io.read_marginal(path, 3)
    assert m.qubits == (2, 0) and m.pmf.to_dict() == {"01": 0.25, "10": 0.75}


def test_marginal_pmf_file_round_trip(tmp_path):
    p = SparsePmf({"011": 0.2, "100": 0.5, "111": 0.3})
    m = marginalize(p, (0, 2))
    io.write_marginal(tmp_path / "m.json", m, 3)
    back = io.read_marginal(tmp_path / "m.json", 3)
    assert back.pmf.to_dict() == pytest.approx(m.canonical().pmf.to_dict())


@pytest.mark.parametrize("payload,msg", [
    ({"counts": {"0": 1}}, "width"),
    ({"width": 2, "counts": {"0": 1}}, "width 2"),
    ({"width": 1, "counts": {"0": -1}}, "non-negative"),
    ({"width": 1, "shots": 5, "counts": {"0": 1}}, "shots"),
    ({"width": 2, "qubits": [0, 0], "counts": {}}, "distinct"),
])
def test_bad_count_files_name_the_file(tmp_path, payload, msg):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ValidationError) as info:
        io.read_global(path) if "qubits" not in payload else io.read_marginal(path)
    assert str(path) in str(info.value) and msg in str(info.value)


def test_global_reader_rejects_marginal(tmp_path):
    path = tmp_path / "m.json"
    io.write_counts(path, {"1": 2}, 3, (1,))
    with pytest.raises(ValidationError):
        io.read_global(path)


def test_invalid_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{nope")
    with pytest.raises(ValidationError):
        io.load_json(path)


def test_width_mismatch_with_parent(tmp_path):
    path = tmp_path / "m.json"
    io.write_counts(path, {"1": 2}, 3, (1,))
    with pytest.raises(ValidationError):
        io.read_marginal(path, 4)
