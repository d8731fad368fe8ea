"""
Shifts - weighted shifts on the circle
Moment matrices, the principal-minor product formula, the
NotPositive/Semispectral/Spectral classifier and closed-form arc measures
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from core.check_report import CheckReport
from core.errors import ConsistencyError, InputError
from core.form_models import EPS_PSD, Form
from core.forms import eps_rank, is_positive, max_defect

logger = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-12
MINOR_TOL = 1e-12
BORDERLINE = 1e-9  # |c| this close to 1 may legitimately split the two oracles

Arc = Tuple[float, float]


class ShiftClass(Enum):
    """Classification of the form measure generated by a weighted shift"""
    NOT_POSITIVE = "NotPositive"
    SEMISPECTRAL = "Semispectral"
    SPECTRAL = "Spectral"


@dataclass(frozen=True, eq=False)
class ShiftWeights:
    """
    Weights c_l for l in [-L, L-1] on the window [-L, L]

    S e_n = c_{n-1} e_{n-1}. Position j of c holds c_{j-L}.
    """
    window: int
    c: np.ndarray

    def __post_init__(self):
        if self.window < 0:
            raise InputError(f"Window half-width must be nonnegative, got {self.window}")
        c = np.array(self.c, dtype=np.complex128).reshape(-1)
        if c.size != 2 * self.window:
            raise InputError(f"Window [-{self.window}, {self.window}] needs {2 * self.window} weights, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise InputError("Shift weights must be finite")
        c.setflags(write=False)
        object.__setattr__(self, 'c', c)

    @classmethod
    def constant(cls, value: complex, window: int) -> "ShiftWeights":
        return cls(window, np.full(2 * window, value, dtype=np.complex128))

    @classmethod
    def parse(cls, text: str, window: Optional[int] = None) -> "ShiftWeights":
        """
        Weights from "0.9,0.9,1.0" mapped onto c_{-L}..c_{L-1} left to right

        A short list is padded with its last value; without a window
        L = ceil(count / 2).
        """
        items = [item.strip() for item in text.split(',') if item.strip()]
        if not items:
            raise InputError("Empty weight list")
        values = []
        for position, item in enumerate(items):
            try:
                values.append(complex(item.replace(' ', '')))
            except ValueError:
                raise InputError(f"Cannot parse weight '{item}'", position=position) from None
        if window is None:
            window = math.ceil(len(values) / 2)
        if len(values) > 2 * window:
            raise InputError(f"{len(values)} weights do not fit the window [-{window}, {window}]")
        values.extend([values[-1]] * (2 * window - len(values)))
        return cls(window, np.array(values))

    @property
    def indices(self) -> List[int]:
        """Basis indices -L..L of the window"""
        return list(range(-self.window, self.window + 1))

    @property
    def size(self) -> int:
        return 2 * self.window + 1

    def weight(self, l: int) -> complex:
        """c_l"""
        return complex(self.c[l + self.window])


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """(c_mn) over the window; entries[i][j] is c_{i-L, j-L}"""
    window: int
    entries: np.ndarray

    def position(self, index: int) -> int:
        if not -self.window <= index <= self.window:
            raise InputError(f"Index {index} outside the window [-{self.window}, {self.window}]")
        return index + self.window

    def entry(self, m: int, n: int) -> complex:
        return complex(self.entries[self.position(m), self.position(n)])


def moment_matrix(w: ShiftWeights) -> MomentMatrix:
    """c_mm = 1, c_mn = prod_{l=m}^{n-1} c_l for m < n, c_nm = conj(c_mn)"""
    size = w.size
    entries = np.eye(size, dtype=np.complex128)
    for i in range(size):
        product = 1.0 + 0j
        for j in range(i + 1, size):
            product *= w.c[j - 1]
            entries[i, j] = product
            entries[j, i] = np.conj(product)
    entries.setflags(write=False)
    return MomentMatrix(w.window, entries)


def principal_minor(M: MomentMatrix, indices: Sequence[int]) -> Tuple[complex, float]:
    """
    Determinant of the principal submatrix at k_1 < ... < k_s and the product
    prod_l (1 - |c_{k_l k_{l+1}}|^2)
    """
    indices = list(indices)
    if sorted(set(indices)) != indices:
        raise InputError(f"Minor indices must be strictly increasing, got {indices}")
    positions = [M.position(k) for k in indices]
    if not positions:
        return 1.0 + 0j, 1.0
    sub = M.entries[np.ix_(positions, positions)]
    det = complex(scipy.linalg.det(sub))
    formula = 1.0
    for a, b in zip(positions, positions[1:]):
        formula *= 1.0 - abs(M.entries[a, b]) ** 2
    if abs(det - formula) > MINOR_TOL * max(1.0, abs(formula)):
        logger.warning(f"Minor {indices}: det={det:.17g} vs product formula {formula:.17g}")
    return det, float(formula)


def _classify_by_weights(w: ShiftWeights, tol: float) -> ShiftClass:
    moduli = np.abs(w.c)
    if np.all(np.abs(moduli - 1.0) <= tol):
        return ShiftClass.SPECTRAL
    if np.all(moduli <= 1.0 + tol):
        return ShiftClass.SEMISPECTRAL
    return ShiftClass.NOT_POSITIVE


def classify(w: ShiftWeights, tol: float = CLASSIFY_TOL) -> ShiftClass:
    """
    Spectral iff every |c_l| = 1, Semispectral iff every |c_l| <= 1 with some
    below 1, NotPositive otherwise

    Cross-checked against the PSD test of (c_mn), and spectral classes
    against rank one of (c_mn).
    """
    verdict = _classify_by_weights(w, tol)
    moments = Form(moment_matrix(w).entries)
    psd = is_positive(moments, tol).positive
    rank_one = eps_rank(moments, EPS_PSD) == 1

    agrees = psd == (verdict != ShiftClass.NOT_POSITIVE)
    if psd:
        agrees = agrees and rank_one == (verdict == ShiftClass.SPECTRAL)
    if not agrees:
        closest = float(np.min(np.abs(np.abs(w.c) - 1.0))) if w.c.size else 0.0
        if closest <= BORDERLINE:
            logger.warning(f"Borderline shift weights: verdict {verdict.value}, PSD oracle {psd}, rank one {rank_one}")
        else:
            raise ConsistencyError(
                f"Weight criterion says {verdict.value} but the moment-matrix oracle says psd={psd}, rank_one={rank_one}"
            )
    logger.debug(f"Shift on window {w.window}: {verdict.value}")
    return verdict


def _check_arc(arc: Arc) -> Arc:
    t0, t1 = float(arc[0]), float(arc[1])
    if not 0.0 <= t0 <= t1 <= 2 * np.pi:
        raise InputError(f"Arc must satisfy 0 <= t0 <= t1 <= 2pi, got [{t0}, {t1})")
    return t0, t1


def arc_integral(q: int, arc: Arc) -> complex:
    """I_q(arc) = (1/2pi) int_{t0}^{t1} e^{iqt} dt in closed form"""
    t0, t1 = _check_arc(arc)
    if q == 0:
        return complex((t1 - t0) / (2 * np.pi))
    return complex((np.exp(1j * q * t1) - np.exp(1j * q * t0)) / (2j * np.pi * q))


def arc_form(w: ShiftWeights, arc: Arc) -> Form:
    """E_S(arc)(e_m, e_n) = c_mn I_{m-n}(arc)"""
    arc = _check_arc(arc)
    if arc[1] - arc[0] == 2 * np.pi:
        return Form(np.eye(w.size))
    size = w.size
    integrals = np.array([arc_integral(q, arc) for q in range(-(size - 1), size)])
    offsets = np.subtract.outer(np.arange(size), np.arange(size))
    return Form(moment_matrix(w).entries * integrals[offsets + size - 1])


def moment_form(w: ShiftWeights, k: int) -> Form:
    """Entries c_mn where n - m = k, zero elsewhere"""
    if abs(k) > 2 * w.window:
        raise InputError(f"|k| = {abs(k)} exceeds the window span {2 * w.window}")
    moments = moment_matrix(w).entries
    mask = np.eye(w.size, k=k, dtype=bool)
    return Form(np.where(mask, moments, 0.0))


def shift_matrix(w: ShiftWeights) -> np.ndarray:
    """Matrix of S on the window: S[n-1][n] = c_{n-1}"""
    return np.diag(w.c, k=1).astype(np.complex128)


def moment_form_defect(w: ShiftWeights, k: int) -> float:
    """max |moment_form(k) - S^k|, with (S*)^{-k} for k < 0 and I for k = 0"""
    S = shift_matrix(w)
    if k > 0:
        expected = np.linalg.matrix_power(S, k)
    elif k < 0:
        expected = np.linalg.matrix_power(S.conj().T, -k)
    else:
        expected = np.eye(w.size)
    return max_defect(moment_form(w, k).entries, expected)


def extension_witness(w: ShiftWeights, arcs: Iterable[Arc], tol: float = EPS_PSD) -> CheckReport:
    """Positivity of every tested arc form plus full-circle normalization"""
    report = CheckReport('shift_extension')
    eigenvalues = []
    for arc in arcs:
        positivity = is_positive(arc_form(w, arc), tol)
        eigenvalues.append(positivity.min_eigenvalue)
        report.flag('arc_positive', positivity.positive)
    report.record('normalization', max_defect(arc_form(w, (0.0, 2 * np.pi)).entries, np.eye(w.size)), tol)
    report.details['classification'] = classify(w).value
    report.details['min_eigenvalue'] = min(eigenvalues) if eigenvalues else None
    return report


def minor_sweep(w: ShiftWeights, max_size: Optional[int] = None) -> CheckReport:
    """Determinant against product formula on every principal subset"""
    M = moment_matrix(w)
    report = CheckReport('principal_minors')
    count = 0
    sizes = range(1, (max_size or w.size) + 1)
    for s in sizes:
        for subset in itertools.combinations(w.indices, s):
            det, formula = principal_minor(M, subset)
            report.record('product_formula', abs(det - formula) / max(1.0, abs(formula)), MINOR_TOL)
            count += 1
    report.details['subsets'] = count
    return report
