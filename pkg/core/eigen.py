"""
Eigen - generalized eigenvectors
The extension T~ on coefficient sequences, shift eigensolutions, the
expansion of finite normal matrices and the Haar-measure recovery for the
bilateral shift
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.cluster.hierarchy import fclusterdata

from core.check_report import CheckReport
from core.errors import AliasingError, InputError, PreconditionError
from core.form_models import EPS_PSD, EPS_RANK, DiscretePSFM, WeightSequence
from core.forms import max_defect
from core.pointwise import PointwiseDecomposition, decompose
from core.psfm import betas
from core.shifts import ShiftWeights, arc_form

logger = logging.getLogger(__name__)

CLUSTER_GAP = 1e-8       # relative to ||T||
NORMALITY_TOL = 1e-10    # relative to ||T||^2
EXPANSION_TOL = 1e-9
SHIFT_RESIDUAL_TOL = 1e-12
FOURIER_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    T[m][n] = <e_m | T e_n> on indices origin..origin+size-1

    band = (lower, upper) marks a windowed truncation of a banded operator
    with that many sub- and super-diagonals; rows whose band reaches past
    the window are incomplete. row_support gives the complete rows
    explicitly for truncations without a uniform band. With neither, the
    operator is finite and every row is complete. Sparse entries stay
    sparse (CSR).
    """
    entries: Union[np.ndarray, scipy.sparse.csr_matrix]
    origin: int = 0
    band: Optional[Tuple[int, int]] = None
    row_support: Optional[np.ndarray] = None

    def __post_init__(self):
        if scipy.sparse.issparse(self.entries):
            entries = scipy.sparse.csr_matrix(self.entries, dtype=np.complex128)
        else:
            entries = np.array(self.entries, dtype=np.complex128)
            if entries.ndim == 2:
                entries.setflags(write=False)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InputError(f"Operator matrix must be square, got shape {entries.shape}")
        object.__setattr__(self, 'entries', entries)
        if self.row_support is not None:
            support = np.asarray(self.row_support, dtype=bool)
            if support.shape != (entries.shape[0],):
                raise InputError(f"Row support must have length {entries.shape[0]}, got shape {support.shape}")
            object.__setattr__(self, 'row_support', support)

    @classmethod
    def shift(cls, window: int, weights: Optional[ShiftWeights] = None) -> "OperatorMatrix":
        """Weighted shift S e_n = c_{n-1} e_{n-1} on [-window, window]; c = 1 by default"""
        if weights is None:
            weights = ShiftWeights.constant(1.0, window)
        elif weights.window != window:
            raise InputError(f"Weights cover window {weights.window}, expected {window}")
        return cls(np.diag(weights.c, k=1), -window, (0, 1))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def indices(self) -> List[int]:
        return list(range(self.origin, self.origin + self.size))

    @property
    def complete_rows(self) -> np.ndarray:
        """Rows whose full support lies inside the index set"""
        if self.row_support is not None:
            return self.row_support.copy()
        mask = np.ones(self.size, dtype=bool)
        if self.band is not None:
            lower, upper = self.band
            mask[:lower] = False
            if upper:
                mask[self.size - upper:] = False
        return mask

    @property
    def finite(self) -> bool:
        return self.band is None and self.row_support is None

    def dense(self) -> np.ndarray:
        if scipy.sparse.issparse(self.entries):
            return self.entries.toarray()
        return self.entries

    def adjoint(self) -> "OperatorMatrix":
        """
        Matrix of T* on the same indices

        An explicit row support carries over only for a Hermitian support
        pattern, where rows and columns are complete together.
        """
        entries = self.entries.conj().T
        if scipy.sparse.issparse(entries):
            entries = entries.tocsr()
        band = None if self.band is None else (self.band[1], self.band[0])
        if self.row_support is not None and not _symmetric_pattern(self.entries):
            raise InputError("Adjoint of a truncation with explicit row support needs a symmetric pattern")
        return OperatorMatrix(entries, self.origin, band, self.row_support)

    def normality_defect(self) -> float:
        """||T T^H - T^H T||_max"""
        T = self.dense()
        return max_defect(T @ T.conj().T, T.conj().T @ T)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.dense(), 2)) if self.size else 0.0


def _symmetric_pattern(entries) -> bool:
    pattern = abs(entries) > 0
    if scipy.sparse.issparse(pattern):
        return (pattern != pattern.T).nnz == 0
    return bool(np.array_equal(pattern, pattern.T))


@dataclass(frozen=True, eq=False)
class ShiftEigenvector:
    """d_j = lambda^j on the window; a generalized eigenvector of the shift"""
    eigenvalue: complex
    window: int
    coefficients: np.ndarray
    residual: float
    adjoint_residual: float

    @property
    def simultaneous(self) -> bool:
        """Also a generalized eigenvector of S* for conj(lambda)"""
        return self.adjoint_residual <= SHIFT_RESIDUAL_TOL


@dataclass(frozen=True, eq=False)
class GeneralizedEigensystem:
    """Points lambda_j with multiplicities n(lambda_j), weights mu_j and rows d_k(lambda_j)"""
    points: np.ndarray
    multiplicities: Tuple[int, ...]
    weights: np.ndarray
    d_rows: Tuple[np.ndarray, ...]
    decomposition: PointwiseDecomposition
    measure: DiscretePSFM
    report: CheckReport = field(default_factory=lambda: CheckReport('spectral_expand'))

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    def eigenvectors(self, j: int) -> np.ndarray:
        """Coefficient sequences of |d_k(lambda_j)>, one per column"""
        return self.d_rows[j].conj().T


def tilde_apply(T: OperatorMatrix, d, rows: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    (T~ d)_n = sum_j T[n][j] d_j for the requested row indices

    rows are basis indices (not positions) and default to every row; a row
    whose support leaves the index set of d is rejected.
    """
    d = np.asarray(d, dtype=np.complex128)
    if d.shape != (T.size,):
        raise InputError(f"Coefficient sequence must have length {T.size}, got shape {d.shape}")
    positions = np.arange(T.size) if rows is None else np.array([n - T.origin for n in rows], dtype=int)
    complete = T.complete_rows
    for position in positions:
        if not 0 <= position < T.size:
            raise InputError(f"Row {position + T.origin} outside indices {T.origin}..{T.origin + T.size - 1}")
        if not complete[position]:
            raise InputError(f"Row {position + T.origin} has support outside the window")
    return T.entries[positions] @ d


def _complete_indices(T: OperatorMatrix) -> List[int]:
    return [n for n, ok in zip(T.indices, T.complete_rows) if ok]


def shift_eigensolve(lam: complex, window: int) -> Optional[ShiftEigenvector]:
    """
    d_j = lambda^j (d_0 = 1) solves d_{n+1} = lambda d_n; lambda = 0 admits only d = 0

    The adjoint equation d_{n-1} = conj(lambda) d_n holds iff |lambda| = 1.
    """
    lam = complex(lam)
    if lam == 0:
        logger.debug("Shift eigensolve: lambda = 0 has only the trivial solution")
        return None
    exponents = np.arange(-window, window + 1)
    d = lam ** exponents.astype(np.complex128)
    scale = float(np.max(np.abs(d)))

    S = OperatorMatrix.shift(window)
    rows = _complete_indices(S)
    positions = [n + window for n in rows]
    residual = max_defect(tilde_apply(S, d, rows), lam * d[positions]) / scale

    adjoint = S.adjoint()
    rows = _complete_indices(adjoint)
    positions = [n + window for n in rows]
    adjoint_residual = max_defect(tilde_apply(adjoint, d, rows), np.conj(lam) * d[positions]) / scale
    return ShiftEigenvector(lam, window, d, residual, adjoint_residual)


def _cluster(eigenvalues: np.ndarray, gap: float) -> List[np.ndarray]:
    """Single-linkage groups of eigenvalues closer than gap, ordered by (real, imag)"""
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    if eigenvalues.size < 2:
        return [order]
    points = np.column_stack([eigenvalues.real, eigenvalues.imag])
    labels = fclusterdata(points, t=gap, criterion='distance', method='single')
    groups = {}
    for index in order:
        groups.setdefault(labels[index], []).append(index)
    return [np.array(members) for members in groups.values()]


def spectral_expand(T: OperatorMatrix, alpha: Optional[WeightSequence] = None,
                    tol: float = EXPANSION_TOL, rank_tol: float = EPS_RANK,
                    psd_tol: float = EPS_PSD) -> GeneralizedEigensystem:
    """
    Generalized eigenvector expansion of a finite normal matrix

    The Schur form gives orthonormal eigenvectors; eigenvalues within
    1e-8 ||T|| are merged, their spectral projections become the atoms of a
    PSFM and the pointwise decomposition yields mu_j and d_k(lambda_j).
    """
    if not T.finite:
        raise InputError("Spectral expansion needs a finite operator, not a windowed truncation")
    norm = T.norm
    defect = T.normality_defect()
    if defect > NORMALITY_TOL * max(norm ** 2, np.finfo(float).tiny):
        raise PreconditionError(f"Operator is not normal: ||TT^H - T^HT||_max = {defect:.3e}")
    if alpha is None:
        alpha = WeightSequence.dyadic(T.size)

    R, Z = scipy.linalg.schur(T.dense(), output='complex')
    eigenvalues = np.diag(R).copy()
    groups = _cluster(eigenvalues, CLUSTER_GAP * norm) if T.size else []

    points = np.array([eigenvalues[g].mean() for g in groups], dtype=np.complex128)
    projections = [Z[:, g] @ Z[:, g].conj().T for g in groups]
    labels = [f"lambda{j}" for j in range(len(groups))]
    E = DiscretePSFM.from_matrices(projections, labels, T.size)
    P = decompose(E, alpha, rank_tol, psd_tol)
    logger.info(f"Spectral expansion: {len(groups)} points, multiplicities {P.ranks}")

    system = GeneralizedEigensystem(
        points,
        tuple(P.ranks),
        np.array(P.measure.weights),
        tuple(atom.d_rows for atom in P.atoms),
        P,
        E,
    )
    _verify_expansion(T, system, alpha, tol)
    return system


def _verify_expansion(T: OperatorMatrix, system: GeneralizedEigensystem,
                      alpha: WeightSequence, tol: float):
    report = system.report
    N = T.size
    scale = max(1.0, T.norm)
    report.flag('multiplicities', sum(system.multiplicities) == N)

    expansion = np.zeros((N, N), dtype=np.complex128)
    identity = np.zeros((N, N), dtype=np.complex128)
    for lam, weight, rows in zip(system.points, system.weights, system.d_rows):
        outer = weight * (rows.conj().T @ rows)
        expansion += lam * outer
        identity += outer
    report.record('expansion', max_defect(expansion, T.dense()) / scale, tol)
    report.record('resolution_of_identity', max_defect(identity, np.eye(N)), tol)

    adjoint = T.adjoint()
    beta = betas(system.measure, alpha)
    report.record('size_bound_beta', max_defect(beta, alpha.truncate(N) / 2.0), tol)
    for j, lam in enumerate(system.points):
        for d in system.eigenvectors(j).T:
            length = max(float(np.linalg.norm(d)), 1.0)
            report.record('eigen_equation', max_defect(tilde_apply(T, d), lam * d) / (scale * length), tol)
            report.record('adjoint_equation',
                          max_defect(tilde_apply(adjoint, d), np.conj(lam) * d) / (scale * length), tol)
            size = float(np.sum(np.abs(d) ** 2 * beta))
            report.record('size_bound', max(size - 1.0, 0.0), tol)

    dense = T.dense()
    hermitian = max_defect(dense, dense.conj().T) <= tol * scale
    unitary = max_defect(dense @ dense.conj().T, np.eye(N)) <= tol
    if hermitian:
        report.record('real_points', float(np.max(np.abs(system.points.imag), initial=0.0)), tol * scale)
    if unitary:
        report.record('unit_circle', float(np.max(np.abs(np.abs(system.points) - 1.0), initial=0.0)), 1e-10)
    report.details['points'] = [[float(p.real), float(p.imag)] for p in system.points]
    report.details['multiplicities'] = list(system.multiplicities)
    report.details['normality_defect'] = T.normality_defect()
    if not report.passed:
        logger.warning(f"Spectral expansion checks failed: {report.failures()}")


def eigenpair_check(T: OperatorMatrix, tol: float = EXPANSION_TOL) -> CheckReport:
    """Every ordinary eigenpair (lambda, v) satisfies T~ v = lambda v"""
    report = CheckReport('eigenpairs')
    if not T.finite:
        raise InputError("Ordinary eigenpairs need a finite operator")
    if not T.size:
        return report
    eigenvalues, vectors = scipy.linalg.eig(T.dense())
    scale = max(1.0, T.norm)
    for lam, v in zip(eigenvalues, vectors.T):
        report.record('eigenpair', max_defect(tilde_apply(T, v), lam * v) / scale, tol)
    report.details['count'] = int(eigenvalues.size)
    return report


def weighted_size_check(system: GeneralizedEigensystem, rho, tol: float = EXPANSION_TOL) -> CheckReport:
    """
    Size of the generalized eigenvectors against a user weight rho in l^2

    Reports sum_n |rho_n d_k(lambda)_n|^2 per vector and the bound
    sum_n |d_k(lambda)_n|^2 beta_n <= 1 with beta_n = alpha_n / 2.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (system.dim,):
        raise InputError(f"Weight must have length {system.dim}, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InputError("Weight must be finite")
    report = CheckReport('weighted_size')
    beta = system.decomposition.weights.truncate(system.dim) / 2.0
    sizes = []
    for j in range(len(system.points)):
        for d in system.eigenvectors(j).T:
            size = float(np.sum(np.abs(rho * d) ** 2))
            sizes.append(size)
            report.flag('finite', bool(np.isfinite(size)))
            report.record('size_bound', max(float(np.sum(np.abs(d) ** 2 * beta)) - 1.0, 0.0), tol)
    report.details['weighted_sizes'] = sizes
    report.details['rho_norm'] = float(np.linalg.norm(rho))
    return report


def _root_powers(M: int, exponents: np.ndarray) -> np.ndarray:
    """lambda_j^q for the M-th roots of unity, exponent reduced mod M; shape (M, len(q))"""
    j = np.arange(M)[:, None]
    reduced = np.mod(j * exponents[None, :], M)
    return np.exp(2j * np.pi * reduced / M)


def haar_recovery(J: int, M: int, arcs: Optional[Sequence[Tuple[int, int]]] = None,
                  tol: float = FOURIER_TOL) -> CheckReport:
    """
    Recover the Haar measure of the bilateral shift on [-J, J] from M grid points

    Each lambda_j = e^{2 pi i j / M} carries weight 1/M and the eigenvector
    d(lambda_j)_n = lambda_j^n. Checks discrete Fourier orthogonality, the
    full-circle identity and grid-aligned arcs (a, b) -> [2 pi a/M, 2 pi b/M)
    against the closed-form arc measure, whose gap is O(1/M).
    """
    if J < 0:
        raise InputError(f"Window half-width must be nonnegative, got {J}")
    if M <= 2 * J:
        raise AliasingError(f"Grid of {M} points aliases the window [-{J}, {J}]; need M > {2 * J}")
    if arcs is None:
        arcs = [(0, M // 2), (0, M // 4), (M // 4, M)]

    report = CheckReport('haar_recovery')
    window = np.arange(-J, J + 1)
    offsets = np.subtract.outer(window, window)
    q_values = np.arange(-2 * J, 2 * J + 1)
    moments = _root_powers(M, q_values).mean(axis=0)  # int lambda^q dmu
    expected = (q_values == 0).astype(float)
    report.record('fourier_orthogonality', max_defect(moments, expected), tol)

    full_circle = moments[offsets + 2 * J]
    report.record('full_circle', max_defect(full_circle, np.eye(window.size)), tol)

    vectors = _root_powers(M, window)  # row j is d(lambda_j)
    sample = shift_eigensolve(np.exp(2j * np.pi / M), J)
    report.record('eigen_residual', sample.residual, SHIFT_RESIDUAL_TOL)
    report.flag('simultaneous', sample.simultaneous)

    weights = ShiftWeights.constant(1.0, J)
    quadrature_limit = 2 * J * np.pi / M + tol
    errors = []
    for a, b in arcs:
        if not 0 <= a <= b <= M:
            raise InputError(f"Grid arc ({a}, {b}) must satisfy 0 <= a <= b <= {M}")
        grid = vectors[a:b]
        discrete = (grid.T @ grid.conj()) / M
        exact = arc_form(weights, (2 * np.pi * a / M, 2 * np.pi * b / M)).entries
        error = max_defect(discrete, exact)
        errors.append(error)
        report.record('arc_quadrature', error, quadrature_limit)

    report.details['grid_points'] = M
    report.details['window'] = J
    report.details['quadrature_errors'] = errors
    report.details['quadrature_limit'] = quadrature_limit
    logger.info(f"Haar recovery on M={M}, J={J}: max arc error {max(errors, default=0.0):.3e}")
    return report
