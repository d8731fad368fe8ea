"""
Matrix IO - read and write matrices and PSFMs
Matrix JSON {"dim": N, "entries": [[[re, im], ...], ...]}, interleaved re,im CSV,
and PSFM JSON {"dim": N, "alphas": [...], "atoms": [{"label", "form"}]}
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from core.errors import InputError
from core.form_models import Atom, DiscretePSFM, Form, WeightSequence

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _load_json_text(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {source}: {e.msg}",
                         position=f"line {e.lineno}, column {e.colno}") from None


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e.strerror}") from None


def _parse_entry(value: Any, where: str) -> complex:
    """[re, im] pair or a bare real number"""
    if isinstance(value, bool):
        raise InputError("Matrix entry must be a number or [re, im]", position=where)
    if isinstance(value, (int, float)):
        return complex(value, 0.0)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(part, (int, float)) and not isinstance(part, bool) for part in value):
        return complex(value[0], value[1])
    raise InputError(f"Matrix entry must be a number or [re, im], got {value!r}", position=where)


def parse_matrix_json(doc: Any, where: str = "$") -> np.ndarray:
    """Matrix from a parsed Matrix JSON object"""
    if not isinstance(doc, dict):
        raise InputError("Matrix must be an object with 'dim' and 'entries'", position=where)
    dim = doc.get('dim')
    entries = doc.get('entries')
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise InputError(f"'dim' must be a nonnegative integer, got {dim!r}", position=f"{where}.dim")
    if not isinstance(entries, list) or len(entries) != dim:
        raise InputError(f"'entries' must hold {dim} rows", position=f"{where}.entries")
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for m, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != dim:
            raise InputError(f"Row must hold {dim} entries", position=f"{where}.entries[{m}]")
        for n, value in enumerate(row):
            matrix[m, n] = _parse_entry(value, f"{where}.entries[{m}][{n}]")
    if not np.all(np.isfinite(matrix)):
        raise InputError("Matrix entries must be finite", position=f"{where}.entries")
    return matrix


def parse_matrix_csv(text: str) -> np.ndarray:
    """Square matrix from rows of interleaved re,im values"""
    rows = [row for row in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in row)]
    dim = len(rows)
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for m, row in enumerate(rows):
        if len(row) != 2 * dim:
            raise InputError(f"Expected {2 * dim} interleaved values, got {len(row)}", position=f"row {m + 1}")
        for k, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise InputError(f"Not a number: '{cell.strip()}'", position=f"row {m + 1}, column {k + 1}") from None
            if k % 2 == 0:
                matrix[m, k // 2] += value
            else:
                matrix[m, k // 2] += 1j * value
    return matrix


def read_matrix(path: PathLike) -> np.ndarray:
    """Matrix file by suffix: .csv is interleaved CSV, anything else Matrix JSON"""
    text = _read_text(path)
    if Path(path).suffix.lower() == '.csv':
        matrix = parse_matrix_csv(text)
    else:
        matrix = parse_matrix_json(_load_json_text(text, str(path)))
    logger.debug(f"Read {matrix.shape[0]}x{matrix.shape[0]} matrix from {path}")
    return matrix


def matrix_to_json(matrix) -> Dict[str, Any]:
    matrix = np.asarray(matrix, dtype=np.complex128)
    return {
        'dim': int(matrix.shape[0]),
        'entries': [[[float(z.real), float(z.imag)] for z in row] for row in matrix],
    }


def parse_psfm_document(doc: Any) -> Tuple[DiscretePSFM, Optional[WeightSequence]]:
    """PSFM and optional weights from a parsed PSFM JSON object"""
    if not isinstance(doc, dict):
        raise InputError("PSFM document must be an object", position="$")
    dim = doc.get('dim')
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise InputError(f"'dim' must be a nonnegative integer, got {dim!r}", position="$.dim")
    atoms_doc = doc.get('atoms')
    if not isinstance(atoms_doc, list) or not atoms_doc:
        raise InputError("'atoms' must be a nonempty list", position="$.atoms")

    atoms = []
    for i, item in enumerate(atoms_doc):
        where = f"$.atoms[{i}]"
        if not isinstance(item, dict) or 'form' not in item:
            raise InputError("Atom must be an object with 'form'", position=where)
        label = item.get('label', f"w{i}")
        if not isinstance(label, str) or not label:
            raise InputError("Atom label must be a nonempty string", position=f"{where}.label")
        matrix = parse_matrix_json(item['form'], f"{where}.form")
        if matrix.shape[0] != dim:
            raise InputError(f"Atom '{label}' has dimension {matrix.shape[0]}, expected {dim}",
                             position=f"{where}.form.dim")
        atoms.append(Atom(label, Form(matrix)))

    alpha = None
    if 'alphas' in doc:
        alphas = doc['alphas']
        if not isinstance(alphas, list) or len(alphas) < dim:
            raise InputError(f"'alphas' must list at least {dim} weights", position="$.alphas")
        try:
            values = np.array(alphas, dtype=float)
        except (TypeError, ValueError):
            raise InputError("'alphas' must be numbers", position="$.alphas") from None
        try:
            alpha = WeightSequence(values)
        except InputError as e:
            raise InputError(str(e), position="$.alphas") from None

    return DiscretePSFM(tuple(atoms), dim), alpha


def load_psfm(path: PathLike) -> Tuple[DiscretePSFM, Optional[WeightSequence]]:
    """Read a PSFM JSON file"""
    E, alpha = parse_psfm_document(_load_json_text(_read_text(path), str(path)))
    logger.info(f"Loaded PSFM from {path}: {E.get_summary()}")
    return E, alpha


def psfm_to_json(E: DiscretePSFM, alpha: Optional[WeightSequence] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        'dim': E.dim,
        'atoms': [{'label': atom.label, 'form': matrix_to_json(atom.form.entries)} for atom in E.atoms],
    }
    if alpha is not None:
        doc['alphas'] = [float(a) for a in alpha.alphas]
    return doc


def write_json(path: PathLike, doc: Dict[str, Any]):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding='utf-8')
