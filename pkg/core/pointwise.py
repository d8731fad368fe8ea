"""
Pointwise - per-atom rank decomposition and the direct-integral model
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from core.check_report import CheckReport
from core.dilation import (NaimarkDilation, atoms_idempotent, dilate,
                           unitary_equivalence)
from core.errors import ConsistencyError, InputError, PreconditionError
from core.form_models import (EPS_PSD, EPS_RANK, EPS_VERIFY, AtomSelector,
                              DiscretePSFM, MuMeasure, WeightSequence,
                              as_vector, resolve_atoms)
from core.forms import evaluate, max_defect, orthonormalize
from core.psfm import density, is_semispectral, mu

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AtomDecomposition:
    """Rank n(omega), functional rows <d_k(omega)| and survivors g_k(omega)"""
    label: str
    rank: int
    mu: float
    d_rows: np.ndarray
    g_vectors: np.ndarray
    indices: Tuple[int, ...] = ()

    def coefficients(self, phi) -> np.ndarray:
        """(<d_k | phi>)_k"""
        return self.d_rows @ phi


@dataclass(frozen=True, eq=False)
class PointwiseDecomposition:
    atoms: Tuple[AtomDecomposition, ...]
    measure: MuMeasure
    weights: WeightSequence
    dim: int

    @property
    def labels(self) -> List[str]:
        return [atom.label for atom in self.atoms]

    @property
    def ranks(self) -> List[int]:
        return [atom.rank for atom in self.atoms]

    @property
    def total_rank(self) -> int:
        return sum(self.ranks)


@dataclass(frozen=True, eq=False)
class DirectIntegralModel:
    """
    Block space of dimension sum n(omega) with J1 and block projections F1

    J1 phi = (sqrt(mu({omega})) <d_k(omega) | phi>)_{omega, k}, so the block
    space carries the plain Euclidean inner product.
    """
    block_dims: Tuple[int, ...]
    J1: np.ndarray
    F1_atoms: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...]

    @property
    def kdim(self) -> int:
        return int(sum(self.block_dims))


@dataclass(frozen=True, eq=False)
class DirectIntegralResult:
    model: DirectIntegralModel
    report: CheckReport


def decompose(E: DiscretePSFM, alpha: Optional[WeightSequence] = None,
              tol: float = EPS_RANK, psd_tol: float = EPS_PSD,
              measure: Optional[MuMeasure] = None) -> PointwiseDecomposition:
    """
    Gram-Schmidt of every density C_omega

    d_rows[k] evaluates phi -> C_omega(g_k, phi) so that
    <d_k(omega) | g_l(omega)> = delta_kl and
    C_omega(phi, psi) = sum_k conj(<d_k|phi>) <d_k|psi>.
    mu-null atoms are kept with rank 0 so atom indices stay aligned.
    """
    if alpha is None:
        alpha = WeightSequence.dyadic(E.dim)
    if measure is None:
        measure = mu(E, alpha, psd_tol)
    densities = density(E, measure, psd_tol)

    atoms = []
    for atom, C, weight in zip(E.atoms, densities, measure.weights):
        if weight == 0.0:
            atoms.append(AtomDecomposition(
                atom.label, 0, 0.0,
                np.zeros((0, E.dim), dtype=np.complex128),
                np.zeros((E.dim, 0), dtype=np.complex128),
            ))
            continue
        basis = orthonormalize(C, tol, psd_tol)
        atoms.append(AtomDecomposition(
            atom.label, basis.rank, float(weight),
            np.asarray(basis.functionals), np.asarray(basis.vectors), basis.indices,
        ))
        logger.debug(f"Atom '{atom.label}': n={basis.rank}, mu={weight:.6g}, indices={basis.indices}")

    logger.info(f"Pointwise decomposition: ranks {[a.rank for a in atoms]}")
    return PointwiseDecomposition(tuple(atoms), measure, alpha, E.dim)


def reconstruct(P: PointwiseDecomposition, X: Optional[Iterable[AtomSelector]],
                phi, psi) -> complex:
    """sum_{omega in X} sum_k <phi|d_k(omega)> <d_k(omega)|psi> mu({omega})"""
    phi = as_vector(phi, P.dim, "phi")
    psi = as_vector(psi, P.dim, "psi")
    total = 0j
    for i in resolve_atoms(P.labels, X):
        atom = P.atoms[i]
        if atom.rank:
            total += atom.mu * np.vdot(atom.coefficients(phi), atom.coefficients(psi))
    return complex(total)


def reconstruct_matrix(P: PointwiseDecomposition,
                       X: Optional[Iterable[AtomSelector]] = None) -> np.ndarray:
    """Matrix of reconstruct over basis pairs, i.e. E_X"""
    total = np.zeros((P.dim, P.dim), dtype=np.complex128)
    for i in resolve_atoms(P.labels, X):
        atom = P.atoms[i]
        total += atom.mu * (atom.d_rows.conj().T @ atom.d_rows)
    return total


def parseval_defect(P: PointwiseDecomposition, E: DiscretePSFM, phi) -> float:
    """sum_omega sum_k |<d_k|phi>|^2 mu - E_Omega(phi, phi)"""
    return float(reconstruct(P, None, phi, phi).real - evaluate(E.total(), phi, phi).real)


def _build_model(P: PointwiseDecomposition) -> DirectIntegralModel:
    rows = [np.sqrt(atom.mu) * atom.d_rows for atom in P.atoms]
    J1 = np.vstack(rows) if rows else np.zeros((0, P.dim), dtype=np.complex128)
    kdim = J1.shape[0]
    projections = []
    offset = 0
    for atom in P.atoms:
        diagonal = np.zeros(kdim, dtype=np.complex128)
        diagonal[offset:offset + atom.rank] = 1.0
        projections.append(np.diag(diagonal))
        offset += atom.rank
    return DirectIntegralModel(tuple(P.ranks), J1, tuple(projections), tuple(P.labels))


def model_as_dilation(model: DirectIntegralModel) -> NaimarkDilation:
    """View (K1, F1, J1) as a dilation triple"""
    provenance = tuple((label, k) for label, n in zip(model.labels, model.block_dims) for k in range(n))
    return NaimarkDilation(model.kdim, model.F1_atoms, model.J1, model.labels, provenance)


def direct_integral_model(P: PointwiseDecomposition, E: DiscretePSFM,
                          dilation: Optional[NaimarkDilation] = None,
                          tol: float = EPS_VERIFY, equivalence_tol: float = 1e-9,
                          rank_tol: float = EPS_RANK) -> DirectIntegralResult:
    """
    Direct-integral triple (K1, F1, J1) and its checks

    reconstruction: <J1 phi | F1(omega) J1 psi> = E_{omega}(phi, psi)
    density: {F1(omega) J1 e_i} spans the block space
    blocks: F1 are complementary block projections
    kdim_match / equivalence: same dimension as, and unitarily equivalent to,
    the Gram-route dilation
    """
    if E.dim != P.dim or E.size != len(P.atoms):
        raise InputError(f"Decomposition ({P.dim}, {len(P.atoms)} atoms) does not match E ({E.dim}, {E.size})")
    model = _build_model(P)
    report = CheckReport('direct_integral')
    report.details['block_dims'] = list(model.block_dims)

    scale = E.total().max_norm or 1.0
    for atom, F in zip(E.atoms, model.F1_atoms):
        report.record('reconstruction', max_defect(model.J1.conj().T @ F @ model.J1, atom.form.entries), tol * scale)

    view = model_as_dilation(model)
    span_rank = int(np.linalg.matrix_rank(view.spanning_images())) if model.kdim else 0
    report.flag('density', span_rank == model.kdim)
    report.record('blocks', max_defect(sum(model.F1_atoms, np.zeros((model.kdim, model.kdim))),
                                       np.eye(model.kdim)), tol)

    if dilation is None:
        dilation = dilate(E, P.weights, rank_tol, measure=P.measure)
    report.details['dilation_kdim'] = dilation.kdim
    report.flag('kdim_match', dilation.kdim == model.kdim)
    intertwiner = unitary_equivalence(view, dilation, E, equivalence_tol)
    report.flag('equivalence', intertwiner.passed)
    if intertwiner.defects:
        report.max_defects['equivalence'] = intertwiner.max_defect

    if not report.passed:
        logger.warning(f"Direct-integral checks failed: {report.failures()}")
    return DirectIntegralResult(model, report)


def onb_check(P: PointwiseDecomposition, E: DiscretePSFM, tol: float = EPS_VERIFY) -> bool:
    """
    {J1 e_n} is an orthonormal basis of the block space

    Holds exactly when the semispectral E is a spectral measure; must agree
    with atom idempotency.
    """
    if not is_semispectral(E, tol):
        raise PreconditionError("Orthonormal-basis criterion needs a normalized POM (E_Omega = I)")
    model = _build_model(P)
    onb = model.kdim == P.dim and max_defect(model.J1.conj().T @ model.J1, np.eye(P.dim)) <= tol
    idempotent = atoms_idempotent(E, tol)
    if onb != idempotent:
        raise ConsistencyError(f"Block-space basis test says {onb} but atom idempotency says {idempotent}")
    return bool(onb)
