import json

import numpy as np
import pytest

from core.errors import InputError
from core.form_models import WeightSequence
from core.matrix_io import (load_psfm, matrix_to_json, parse_matrix_csv,
                            parse_matrix_json, parse_psfm_document,
                            psfm_to_json, read_matrix, write_json)


def test_parse_matrix_json_pairs_and_numbers():
    matrix = parse_matrix_json({"dim": 2, "entries": [[[1, 2], 0], [3.5, [0, -1]]]})
    np.testing.assert_array_equal(matrix, [[1 + 2j, 0], [3.5, -1j]])


@pytest.mark.parametrize("doc, position", [
    ({"dim": 2, "entries": [[1, 2]]}, "$.entries"),
    ({"dim": 2, "entries": [[1, 2], [3]]}, "$.entries[1]"),
    ({"dim": 1, "entries": [["x"]]}, "$.entries[0][0]"),
    ({"dim": 1, "entries": [[[1, 2, 3]]]}, "$.entries[0][0]"),
    ({"dim": -1, "entries": []}, "$.dim"),
])
def test_parse_matrix_json_errors(doc, position):
    with pytest.raises(InputError) as error:
        parse_matrix_json(doc)
    assert error.value.position == position


def test_parse_matrix_csv():
    matrix = parse_matrix_csv("1,0,0,1\n0,-1,2,0\n")
    np.testing.assert_array_equal(matrix, [[1, 1j], [-1j, 2]])


def test_parse_matrix_csv_errors():
    with pytest.raises(InputError) as error:
        parse_matrix_csv("1,0,0\n0,0,0,0\n")
    assert error.value.position == "row 1"
    with pytest.raises(InputError) as error:
        parse_matrix_csv("1,0,0,1\n0,zz,2,0\n")
    assert error.value.position == "row 2, column 2"


def test_read_matrix_by_suffix(samples_dir):
    np.testing.assert_array_equal(read_matrix(samples_dir / "normal.csv"), np.diag([1j, 2, 1 + 1j]))
    dense = read_matrix(samples_dir / "normal.json")
    np.testing.assert_array_equal(dense, [[0, -1, 0], [1, 0, 0], [0, 0, 2]])


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 1,\n "atoms": [}\n')
    with pytest.raises(InputError) as error:
        load_psfm(path)
    assert error.value.position.startswith("line 2")


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="Cannot read"):
        load_psfm(tmp_path / "absent.json")


def test_load_samples(samples_dir):
    E, alpha = load_psfm(samples_dir / "two_atom.json")
    assert E.size == 2
    assert E.labels == ["a", "b"]
    assert alpha is None

    E, alpha = load_psfm(samples_dir / "trine.json")
    np.testing.assert_allclose(E.total().entries, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(alpha.alphas, [0.5, 0.25])


def test_psfm_document_errors():
    with pytest.raises(InputError) as error:
        parse_psfm_document({"dim": 2, "atoms": [{"form": {"dim": 1, "entries": [[1]]}}]})
    assert error.value.position == "$.atoms[0].form.dim"
    with pytest.raises(InputError) as error:
        parse_psfm_document({"dim": 1, "atoms": []})
    assert error.value.position == "$.atoms"
    with pytest.raises(InputError) as error:
        parse_psfm_document({"dim": 2, "alphas": [0.5], "atoms": [{"form": {"dim": 2, "entries": [[1, 0], [0, 1]]}}]})
    assert error.value.position == "$.alphas"


def test_psfm_written_and_read_back(tmp_path, two_atom):
    path = tmp_path / "out.json"
    write_json(path, psfm_to_json(two_atom, WeightSequence.dyadic(1)))
    E, alpha = load_psfm(path)
    assert E.labels == two_atom.labels
    np.testing.assert_array_equal(E.atoms[1].form.entries, [[0.75]])
    assert json.loads(path.read_text())["alphas"] == [0.5]
    assert matrix_to_json(np.eye(1)) == {"dim": 1, "entries": [[[1.0, 0.0]]]}
