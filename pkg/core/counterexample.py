"""
Counterexample - a symmetric Hilbert-Schmidt matrix with unit row sums
The all-ones sequence is a generalized eigenvector for eigenvalue 1 while
every finite section keeps its spectrum inside (-1, 1)
"""

import bisect
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse

from core.check_report import CheckReport
from core.dilation import check_dense_memory
from core.eigen import OperatorMatrix, tilde_apply
from core.errors import InputError

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-14
MAX_DENSE_SECTION = 4096
SPECTRUM_TOL = 1e-12

Number = Union[Fraction, float]


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class GrowthSequence:
    """
    Positive integers a_0, a_1, ...

    "geom:A,R" gives a_i = A * R^i. "list:a0,a1,..." is an explicit
    prefix; it must reach far enough for the requested truncation.
    """
    kind: str
    first: int = 8
    ratio: int = 2
    values: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == 'geom':
            if self.first < 1 or self.ratio < 1:
                raise InputError(f"geom needs A >= 1 and R >= 1, got {self.first},{self.ratio}")
        elif self.kind == 'list':
            if not self.values or any(v < 1 for v in self.values):
                raise InputError(f"list needs positive integers, got {list(self.values)}")
        else:
            raise InputError(f"Unknown growth sequence kind '{self.kind}'")

    @classmethod
    def default(cls) -> "GrowthSequence":
        """a_i = 8 * 2^i, bound 1/2"""
        return cls('geom', 8, 2)

    @classmethod
    def parse(cls, text: str) -> "GrowthSequence":
        kind, _, body = text.strip().partition(':')
        items = [item.strip() for item in body.split(',') if item.strip()]
        numbers = []
        for position, item in enumerate(items):
            try:
                numbers.append(int(item))
            except ValueError:
                raise InputError(f"Growth sequence term '{item}' is not an integer", position=position) from None
        if kind == 'geom':
            if len(numbers) != 2:
                raise InputError(f"geom takes exactly two integers A,R, got '{body}'")
            return cls('geom', numbers[0], numbers[1])
        if kind == 'list':
            return cls('list', values=tuple(numbers))
        raise InputError(f"Growth sequence must start with 'geom:' or 'list:', got '{text}'")

    def term(self, i: int) -> int:
        if self.kind == 'geom':
            return self.first * self.ratio ** i
        if i >= len(self.values):
            raise InputError(f"Explicit growth sequence has {len(self.values)} terms, a_{i} is needed")
        return self.values[i]

    def covering(self, size: int) -> List[int]:
        """Shortest prefix a_0..a_I with sigma_I >= size - 1"""
        terms, total = [], 0
        while not terms or total < size - 1:
            terms.append(self.term(len(terms)))
            total += terms[-1]
        return terms

    @property
    def all_powers_of_two(self) -> bool:
        if self.kind == 'geom':
            return _is_power_of_two(self.first) and (self.ratio == 1 or _is_power_of_two(self.ratio))
        return all(_is_power_of_two(v) for v in self.values)

    @property
    def bound(self) -> float:
        """sum_i 2 / a_i; for an explicit list the sum over the listed terms"""
        if self.kind == 'geom':
            if self.ratio == 1:
                return float('inf')
            return 2.0 / self.first * self.ratio / (self.ratio - 1)
        return float(sum(Fraction(2, v) for v in self.values))

    def describe(self) -> str:
        if self.kind == 'geom':
            return f"geom:{self.first},{self.ratio}"
        return "list:" + ",".join(str(v) for v in self.values)


@dataclass(frozen=True, eq=False)
class CounterexampleMatrix:
    """
    K x K section of (m_ij) in CSR storage

    b_values[i] is exact (Fraction) when every a_i is a power of two and is
    kept for the rows whose band sigma_{i-1} < j <= sigma_i reaches into the
    section. complete_rows are those with sigma_i < K.
    """
    size: int
    growth: GrowthSequence
    terms: Tuple[int, ...]
    sigma: Tuple[int, ...]
    b_values: Tuple[Number, ...]
    csr: scipy.sparse.csr_matrix
    complete_rows: Tuple[int, ...]

    @property
    def exact(self) -> bool:
        return bool(self.b_values) and isinstance(self.b_values[0], Fraction)

    def phi(self, j: int) -> int:
        """The unique i with sigma_{i-1} < j <= sigma_i, for j >= 1"""
        return bisect.bisect_left(self.sigma, j)

    def section(self, size: int) -> scipy.sparse.csr_matrix:
        if not 1 <= size <= self.size:
            raise InputError(f"Section size {size} outside 1..{self.size}")
        return self.csr[:size, :size].tocsr()

    def operator(self) -> OperatorMatrix:
        support = np.zeros(self.size, dtype=bool)
        support[list(self.complete_rows)] = True
        return OperatorMatrix(self.csr, 0, None, support)

    def square_sum(self, size: Optional[int] = None) -> float:
        """sum of m_ij^2 over the size x size section"""
        section = self.csr if size is None else self.section(size)
        return float(np.sum(section.data ** 2))


def build(growth: GrowthSequence, size: int) -> CounterexampleMatrix:
    """
    m_ii = 0 and m_ij = m_ji = b_i for sigma_{i-1} < j <= sigma_i

    b_0 = 1/a_0 and b_j = (1 - b_{phi(j)}) / a_j.
    """
    if size < 1:
        raise InputError(f"Truncation size must be at least 1, got {size}")
    terms = growth.covering(size)
    sigma = list(itertools.accumulate(terms))
    exact = growth.all_powers_of_two
    one = Fraction(1) if exact else 1.0

    b_values: List[Number] = []
    for i, a in enumerate(terms):
        if i == 0:
            b_values.append(one / a)
            continue
        phi = bisect.bisect_left(sigma, i)
        b_values.append((one - b_values[phi]) / a)

    rows, cols, data = [], [], []
    for i, b in enumerate(b_values):
        lower = 0 if i == 0 else sigma[i - 1]
        upper = min(sigma[i], size - 1)
        for j in range(lower + 1, upper + 1):
            rows.extend((i, j))
            cols.extend((j, i))
            data.extend((float(b), float(b)))
    csr = scipy.sparse.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()

    complete = tuple(i for i in range(len(terms)) if sigma[i] < size)
    logger.info(f"Counterexample section K={size} from {growth.describe()}: "
                f"{csr.nnz} nonzeros, complete rows {list(complete)}, exact={exact}")
    return CounterexampleMatrix(size, growth, tuple(terms), tuple(sigma), tuple(b_values), csr, complete)


def _row_sum_exact(M: CounterexampleMatrix, i: int) -> Number:
    """b_{phi(i)} + a_i b_i from the construction data"""
    own = M.terms[i] * M.b_values[i]
    return own if i == 0 else M.b_values[M.phi(i)] + own


def verify_properties(M: CounterexampleMatrix) -> CheckReport:
    """
    Symmetry, finite row support, unit row sums on complete rows and the
    partial square sum below one, each complete row adding no more than its
    share 2 / a_i of the bound
    """
    report = CheckReport('counterexample')
    csr = M.csr

    asymmetry = abs(csr - csr.T)
    report.record('symmetry', float(asymmetry.max()) if asymmetry.nnz else 0.0, 0.0)
    report.record('zero_diagonal', float(np.max(np.abs(csr.diagonal()), initial=0.0)), 0.0)
    in_range = bool(np.all(csr.data >= 0.0) and np.all(csr.data <= 1.0))
    report.flag('entries_in_unit_interval', in_range)

    counts = np.diff(csr.indptr)
    overfull = [i for i, count in enumerate(counts) if i < len(M.terms) and count > M.terms[i] + 1]
    overfull += [i for i, count in enumerate(counts) if i >= len(M.terms) and count > 1]
    report.flag('finite_row_support', not overfull)
    if overfull:
        report.details['overfull_rows'] = overfull

    sums = np.asarray(csr.sum(axis=1)).reshape(-1)
    for i in M.complete_rows:
        report.record('unit_row_sums', abs(sums[i] - 1.0), ROW_SUM_TOL)
        report.flag('row_sum_identity', _row_sum_exact(M, i) == 1 if M.exact
                    else abs(_row_sum_exact(M, i) - 1.0) <= ROW_SUM_TOL)

    total = M.square_sum()
    bound = M.growth.bound
    report.flag('square_sum_below_one', total < 1.0)
    for i in M.complete_rows:
        # row i adds 2 a_i b_i^2, at most its 2 / a_i share of the bound
        increment = 2.0 * M.terms[i] * float(M.b_values[i]) ** 2
        report.record('square_sum_increments', max(increment - 2.0 / M.terms[i], 0.0), ROW_SUM_TOL)
    report.flag('square_sum_within_bound', total <= bound + ROW_SUM_TOL)

    report.details['partial_square_sum'] = total
    report.details['bound'] = bound
    report.details['bound_below_one'] = bound < 1.0
    report.details['complete_rows'] = list(M.complete_rows)
    report.details['exact'] = M.exact
    if bound >= 1.0:
        logger.warning(f"Square-sum bound {bound:.6g} is not below one for {M.growth.describe()}")
    if not report.passed:
        logger.warning(f"Counterexample property check failed: {report.failures()}")
    return report


def square_sum_identity(M: CounterexampleMatrix) -> CheckReport:
    """Twice the band square sums of the complete rows equal sum_i 2 a_i b_i^2"""
    report = CheckReport('square_sum_identity')
    upper = scipy.sparse.triu(M.csr, k=1).tocsr()
    band_sums = np.asarray(upper.multiply(upper).sum(axis=1)).reshape(-1)
    measured = 2.0 * float(sum(band_sums[i] for i in M.complete_rows))
    predicted = sum(2 * M.terms[i] * M.b_values[i] ** 2 for i in M.complete_rows)
    report.record('identity', abs(measured - float(predicted)), ROW_SUM_TOL * max(1.0, float(predicted)))
    report.details['measured'] = measured
    report.details['predicted'] = float(predicted)
    if M.exact:
        report.details['predicted_exact'] = str(predicted)
    return report


def truncated_spectrum(M: CounterexampleMatrix, size: Optional[int] = None) -> np.ndarray:
    """Eigenvalues of the size x size section, ascending"""
    size = M.size if size is None else size
    if size > MAX_DENSE_SECTION:
        raise InputError(f"Dense eigensolve limited to sections of size {MAX_DENSE_SECTION}, got {size}")
    check_dense_memory(size, copies=2, what="Section")
    dense = M.section(size).toarray()
    return scipy.linalg.eigvalsh(dense)


def spectrum_sweep(M: CounterexampleMatrix, sizes: Sequence[int]) -> CheckReport:
    """
    max |lambda| per section with the Hilbert-Schmidt bound

    Sections are principal submatrices, so by interlacing max |lambda| is
    nondecreasing in the section size.
    """
    report = CheckReport('spectrum_sweep')
    sizes = sorted(set(int(s) for s in sizes))
    bound = M.growth.bound
    radii: Dict[str, float] = {}
    square_sums: Dict[str, float] = {}
    previous = 0.0
    for size in sizes:
        eigenvalues = truncated_spectrum(M, size)
        radius = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
        square_sum = M.square_sum(size)
        radii[str(size)] = radius
        square_sums[str(size)] = square_sum
        report.record('hilbert_schmidt_bound', radius - np.sqrt(square_sum), SPECTRUM_TOL)
        report.flag('below_one', radius < 1.0)
        report.record('monotone', previous - radius, SPECTRUM_TOL)
        previous = radius
        logger.debug(f"Section {size}: max|lambda|={radius:.17g}, square sum={square_sum:.17g}")
    if np.isfinite(bound):
        report.flag('within_analytic_bound', previous <= np.sqrt(bound) + SPECTRUM_TOL)
    report.details['max_abs_eig'] = radii
    report.details['partial_square_sum'] = square_sums
    report.details['bound'] = bound
    return report


def eigencheck_e(M: CounterexampleMatrix, size: Optional[int] = None) -> CheckReport:
    """
    T~|e> = T~*|e> = |e> on every complete row of the section

    Together with the section spectra this shows 1 as a generalized
    eigenvalue outside the spectrum.
    """
    if size is not None and size != M.size:
        M = build(M.growth, size)
    T = M.operator()
    e = np.ones(M.size)
    rows = list(M.complete_rows)
    report = CheckReport('eigencheck_e')
    forward = tilde_apply(T, e, rows)
    backward = tilde_apply(T.adjoint(), e, rows)
    for value in forward:
        report.record('eigenvalue_one', abs(value - 1.0), ROW_SUM_TOL)
    for value in backward:
        report.record('adjoint_eigenvalue_one', abs(value - 1.0), ROW_SUM_TOL)
    report.details['complete_rows_checked'] = rows
    checked = set(rows)
    report.details['incomplete_rows'] = [i for i in range(M.size) if i not in checked]
    report.details['coordinates'] = [float(v.real) for v in forward]
    report.details['exact'] = bool(np.all(forward == 1.0))
    return report
