"""
Dilation - the Naimark dilation (K, F, J) of a discrete PSFM
Construction from the Gram matrix of simple functions, verification,
the uniqueness unitary and the spectral-measure detector
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import psutil
import scipy.linalg

from core.check_report import CheckReport
from core.errors import ConsistencyError, InputError, PreconditionError
from core.form_models import (EPS_PSD, EPS_RANK, EPS_VERIFY, DiscretePSFM,
                              Form, MuMeasure, WeightSequence)
from core.forms import max_defect, orthonormalize
from core.psfm import density, is_semispectral, is_strict, mu

logger = logging.getLogger(__name__)

BYTES_PER_ENTRY = 16
GRAM_WORKSPACE_COPIES = 4  # coordinates, J, projections, workspace


def check_dense_memory(size: int, copies: int = GRAM_WORKSPACE_COPIES, what: str = "Dilation"):
    """Refuse dense size x size work that would not fit in available RAM"""
    needed = copies * BYTES_PER_ENTRY * size * size
    try:
        available = psutil.virtual_memory().available
    except Exception:
        return  # memory stats unavailable, assume it fits
    if needed > available // 2:
        raise InputError(
            f"{what} of size {size} needs ~{needed / 1024**2:.0f} MB, "
            f"only {available / 1024**2:.0f} MB available"
        )


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """
    Dilation space K = C^kdim with per-atom projections and the embedding J

    K is the coefficient space of the surviving spanning vectors
    [e_i chi_{omega}], ordered atom-major then by basis index.
    """
    kdim: int
    F_atoms: Tuple[np.ndarray, ...]
    J: np.ndarray
    labels: Tuple[str, ...] = ()
    basis_provenance: Tuple[Tuple[str, int], ...] = field(default=())

    def spanning_images(self) -> np.ndarray:
        """Columns F(omega) J e_i, atom-major"""
        if not self.F_atoms:
            return np.zeros((self.kdim, 0), dtype=np.complex128)
        return np.hstack([F @ self.J for F in self.F_atoms])

    def conjugated(self, unitary: np.ndarray) -> "NaimarkDilation":
        """(W F W^H, W J) for a unitary W"""
        W = np.asarray(unitary, dtype=np.complex128)
        return NaimarkDilation(
            self.kdim,
            tuple(W @ F @ W.conj().T for F in self.F_atoms),
            W @ self.J,
            self.labels,
            self.basis_provenance,
        )


@dataclass(frozen=True, eq=False)
class Intertwiner:
    """Result of unitary_equivalence: U with U J1 = J2, U F1 = F2 U"""
    passed: bool
    unitary: Optional[np.ndarray]
    defects: Dict[str, float]
    reason: str = ""

    @property
    def max_defect(self) -> float:
        return max(self.defects.values()) if self.defects else 0.0


def dilate(E: DiscretePSFM, alpha: Optional[WeightSequence] = None,
           tol: float = EPS_RANK, psd_tol: float = EPS_PSD,
           measure: Optional[MuMeasure] = None) -> NaimarkDilation:
    """
    Naimark dilation from the Gram matrix of the spanning family

    theta((e_i, omega), (e_j, omega')) = delta_{omega omega'} C_omega(e_i, e_j) mu({omega});
    K is the quotient of the spanning family by the null space of theta,
    F(omega) projects onto the survivors supported on omega and
    J e_i = [e_i chi_Omega] = sum_omega [e_i chi_{omega}].
    """
    if measure is None:
        if alpha is None:
            alpha = WeightSequence.dyadic(E.dim)
        measure = mu(E, alpha, psd_tol)
    densities = density(E, measure, psd_tol)

    n, m = E.dim, E.size
    size = n * m
    check_dense_memory(size)

    # theta is block diagonal: each atom's block is quotiented against its own diagonal
    blocks = []
    indices: List[int] = []
    owners: List[int] = []
    for a, (C, weight) in enumerate(zip(densities, measure.weights)):
        basis = orthonormalize(Form(C.entries * weight), tol, psd_tol)
        rows = np.zeros((basis.rank, size), dtype=np.complex128)
        rows[:, a * n:(a + 1) * n] = basis.functionals
        blocks.append(rows)
        indices.extend(a * n + i for i in basis.indices)
        owners.extend([a] * basis.rank)
        logger.debug(f"Atom '{E.labels[a]}': {basis.rank} survivors of {n}")

    kdim = len(owners)
    coords = np.vstack(blocks) if blocks else np.zeros((0, size), dtype=np.complex128)  # images of e_i chi_{omega}

    stack = np.tile(np.eye(n, dtype=np.complex128), (m, 1))
    J = coords @ stack

    F_atoms = []
    for a in range(m):
        mask = np.array([owner == a for owner in owners], dtype=np.complex128)
        F_atoms.append(np.diag(mask))

    provenance = tuple((E.labels[index // n], index % n) for index in indices)
    logger.info(f"Dilation built: kdim={kdim} from {size} spanning vectors")
    return NaimarkDilation(kdim, tuple(F_atoms), J, tuple(E.labels), provenance)


def _scale(E: DiscretePSFM) -> float:
    scale = E.total().max_norm
    return scale if scale > 0 else 1.0


def verify_dilation(E: DiscretePSFM, D: NaimarkDilation, tol: float = EPS_VERIFY,
                    psd_tol: float = EPS_PSD) -> CheckReport:
    """
    Itemized check of a dilation against E

    reconstruction: <J phi | F(omega) J psi> = E_{omega}(phi, psi) on basis pairs
    projection: F^2 = F = F^H, sum F = I, F(a) F(b) = 0 for a != b
    minimality: {F(omega) J e_i} spans K
    norm_eq: ||J e_i||^2 = E_Omega(e_i, e_i)
    injectivity: rank J = N exactly when E is strict
    """
    report = CheckReport('dilation')
    report.details['kdim'] = D.kdim
    if D.J.shape != (D.kdim, E.dim) or len(D.F_atoms) != E.size:
        report.flag('dimensions', False)
        report.details['reason'] = f"J shape {D.J.shape}, {len(D.F_atoms)} projections for {E.size} atoms"
        return report

    limit = tol * _scale(E)
    for atom, F in zip(E.atoms, D.F_atoms):
        compressed = D.J.conj().T @ F @ D.J
        report.record('reconstruction', max_defect(compressed, atom.form.entries), limit)

    identity = np.eye(D.kdim)
    for F in D.F_atoms:
        report.record('projection', max_defect(F @ F, F), tol)
        report.record('projection', max_defect(F, F.conj().T), tol)
    report.record('projection', max_defect(sum(D.F_atoms, np.zeros_like(identity)), identity), tol)
    for a in range(len(D.F_atoms)):
        for b in range(a + 1, len(D.F_atoms)):
            report.record('projection', float(np.max(np.abs(D.F_atoms[a] @ D.F_atoms[b])))
                          if D.kdim else 0.0, tol)

    span_rank = int(np.linalg.matrix_rank(D.spanning_images())) if D.kdim else 0
    report.details['span_rank'] = span_rank
    report.flag('minimality', span_rank == D.kdim)

    norms = np.sum(np.abs(D.J) ** 2, axis=0) if D.kdim else np.zeros(E.dim)
    report.record('norm_eq', max_defect(norms, E.total().diagonal()), limit)

    j_rank = int(np.linalg.matrix_rank(D.J)) if D.kdim else 0
    report.details['rank_J'] = j_rank
    report.flag('injectivity', (j_rank == E.dim) == is_strict(E, psd_tol))

    if not report.passed:
        logger.warning(f"Dilation verification failed: {report.failures()}")
    return report


def unitary_equivalence(D1: NaimarkDilation, D2: NaimarkDilation, E: DiscretePSFM,
                        tol: float = 1e-9) -> Intertwiner:
    """
    Unitary U: K1 -> K2 with U J1 = J2 and U F1(omega) = F2(omega) U

    U is defined on the spanning family by F1(omega) J1 e_i -> F2(omega) J2 e_i;
    it is isometric there because both Gram matrices equal E_{omega}(e_i, e_j)
    blockwise.
    """
    if D1.kdim != D2.kdim or D1.J.shape != D2.J.shape or len(D1.F_atoms) != len(D2.F_atoms):
        reason = f"dimension mismatch: kdim {D1.kdim} vs {D2.kdim}, J {D1.J.shape} vs {D2.J.shape}"
        logger.warning(f"Unitary equivalence failed: {reason}")
        return Intertwiner(False, None, {}, reason)

    if D1.kdim == 0:
        return Intertwiner(True, np.zeros((0, 0), dtype=np.complex128), {})

    A1 = D1.spanning_images()
    A2 = D2.spanning_images()
    scale = _scale(E)
    defects = {
        'isometry': max_defect(A1.conj().T @ A1, A2.conj().T @ A2) / scale,
    }
    solution, _, rank, _ = scipy.linalg.lstsq(A1.conj().T, A2.conj().T)
    U = solution.conj().T
    identity = np.eye(D1.kdim)
    defects['unitary'] = max(max_defect(U.conj().T @ U, identity), max_defect(U @ U.conj().T, identity))
    defects['embedding'] = max_defect(U @ D1.J, D2.J) / max(1.0, np.sqrt(scale))
    defects['intertwining'] = max(
        (max_defect(U @ F1, F2 @ U) for F1, F2 in zip(D1.F_atoms, D2.F_atoms)), default=0.0
    )

    passed = rank == D1.kdim and all(value <= tol for value in defects.values())
    reason = "" if passed else f"defects {defects}, span rank {rank} of {D1.kdim}"
    if not passed:
        logger.warning(f"Unitary equivalence failed: {reason}")
    return Intertwiner(passed, U if passed else None, defects, reason)


def atoms_idempotent(E: DiscretePSFM, tol: float = EPS_VERIFY) -> bool:
    """Every atom operator satisfies E_0(X)^2 = E_0(X)"""
    return all(max_defect(a.form.entries @ a.form.entries, a.form.entries) <= tol for a in E.atoms)


def is_spectral(E: DiscretePSFM, D: NaimarkDilation, tol: float = EPS_VERIFY) -> bool:
    """
    Spectral-measure detector for a semispectral E

    True iff kdim = N and J is unitary; must agree with the idempotency of
    every atom operator.
    """
    if not is_semispectral(E, tol):
        raise PreconditionError("Spectral detection needs a normalized POM (E_Omega = I)")
    spectral = False
    if D.kdim == E.dim:
        identity = np.eye(E.dim)
        spectral = (max_defect(D.J.conj().T @ D.J, identity) <= tol
                    and max_defect(D.J @ D.J.conj().T, identity) <= tol)
    idempotent = atoms_idempotent(E, tol)
    if spectral != idempotent:
        raise ConsistencyError(
            f"Dilation detector says spectral={spectral} but atom idempotency says {idempotent}"
        )
    logger.info(f"Spectral detection: kdim={D.kdim}, N={E.dim}, spectral={spectral}")
    return spectral
