"""
PSFM - discrete positive sesquilinear form measures
The scalar measure mu, the pointwise densities C_omega and the strict quotient
"""

import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np
import scipy.linalg

from core.errors import ConsistencyError, ContractViolation, InputError
from core.form_models import (EPS_PSD, EPS_RANK, Atom, DiscretePSFM, Form,
                              MuMeasure, WeightSequence)
from core.forms import is_positive, orthonormalize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StrictQuotient:
    """Strict PSFM on V/N together with the map phi -> [phi]"""
    psfm: DiscretePSFM
    projection: np.ndarray


def validate(E: DiscretePSFM, tol: float = EPS_PSD) -> DiscretePSFM:
    """Raise ContractViolation naming the first non-positive atom"""
    for atom in E.atoms:
        report = is_positive(atom.form, tol)
        if not report.positive:
            raise ContractViolation(
                f"Atom '{atom.label}' is not positive: lambda_min={report.min_eigenvalue:.6g}, "
                f"hermiticity defect={report.hermiticity_defect:.3g}"
            )
    logger.debug(f"All {E.size} atoms positive ({E.get_summary()})")
    return E


def _null_mask(E: DiscretePSFM, tol: float) -> np.ndarray:
    """Atoms whose form vanishes relative to E_Omega"""
    scale = E.total().max_norm
    return np.array([atom.form.max_norm <= tol * scale for atom in E.atoms], dtype=bool)


def betas(E: DiscretePSFM, alpha: WeightSequence) -> np.ndarray:
    """beta_n = alpha_n / (1 + E_Omega(e_n, e_n))"""
    return alpha.truncate(E.dim) / (1.0 + E.total().diagonal())


def mu(E: DiscretePSFM, alpha: WeightSequence, tol: float = EPS_PSD) -> MuMeasure:
    """
    mu({omega}) = sum_n alpha_n E_{omega}(e_n, e_n) / (1 + E_Omega(e_n, e_n))

    Atoms whose form vanishes within tol get weight exactly zero.
    """
    beta = betas(E, alpha)
    weights = np.array([float(np.dot(beta, atom.form.diagonal())) for atom in E.atoms])
    weights = np.where(_null_mask(E, tol), 0.0, np.maximum(weights, 0.0))
    return MuMeasure(weights, tuple(E.labels))


def reference_measure(E: DiscretePSFM, weights, tol: float = EPS_PSD) -> MuMeasure:
    """
    Any finite positive measure with the same null atoms as E

    The dilation and decomposition do not depend on the choice of reference
    measure up to unitary equivalence.
    """
    measure = MuMeasure(weights, tuple(E.labels))
    if measure.weights.size != E.size:
        raise InputError(f"Reference measure has {measure.weights.size} weights for {E.size} atoms")
    null = _null_mask(E, tol)
    mismatched = [E.labels[i] for i in range(E.size) if null[i] != (measure.weights[i] == 0.0)]
    if mismatched:
        raise InputError(f"Reference measure null atoms differ from E at {mismatched}")
    return measure


def density(E: DiscretePSFM, alpha: Union[WeightSequence, MuMeasure],
            tol: float = EPS_PSD) -> List[Form]:
    """
    Discrete Radon-Nikodym derivatives C_omega = E_{omega} / mu({omega})

    C_omega is the zero form on mu-null atoms; a mu-null atom with a nonzero
    form contradicts mutual absolute continuity.
    """
    measure = alpha if isinstance(alpha, MuMeasure) else mu(E, alpha, tol)
    scale = E.total().max_norm
    densities = []
    for atom, weight in zip(E.atoms, measure.weights):
        if weight > 0.0:
            densities.append(atom.form.scaled(1.0 / weight))
            continue
        if atom.form.max_norm > tol * scale:
            raise ConsistencyError(
                f"Atom '{atom.label}' has mu=0 but a nonzero form (max entry {atom.form.max_norm:.3e})"
            )
        densities.append(Form.zeros(E.dim))
    return densities


def is_strict(E: DiscretePSFM, tol: float = EPS_PSD) -> bool:
    """E_Omega positive definite: lambda_min > tol * ||E_Omega||_max"""
    if E.dim == 0:
        return True
    total = E.total()
    scale = total.max_norm
    if scale == 0.0:
        return False
    lam_min = float(scipy.linalg.eigh(total.hermitian_part(), eigvals_only=True)[0])
    return lam_min > tol * scale


def is_semispectral(E: DiscretePSFM, tol: float = EPS_PSD) -> bool:
    """E_Omega = I within tol (normalized POM)"""
    defect = np.max(np.abs(E.total().entries - np.eye(E.dim))) if E.dim else 0.0
    return bool(defect <= tol)


def quotient_strict(E: DiscretePSFM, tol: float = EPS_RANK,
                    psd_tol: float = EPS_PSD) -> StrictQuotient:
    """
    Strict PSFM on V/N, N the null space of E_Omega

    The quotient is realized on the range of E_Omega with a Euclidean
    orthonormal basis Q, so that E~_X(Q^H phi, Q^H psi) = E_X(phi, psi).
    """
    if is_strict(E, psd_tol):
        return StrictQuotient(E, np.eye(E.dim, dtype=np.complex128))

    basis = orthonormalize(E.total(), tol, psd_tol)
    logger.info(f"Quotient by null space: dim {E.dim} -> {basis.rank}")
    if basis.rank:
        q, _ = scipy.linalg.qr(basis.functionals.conj().T, mode='economic')
    else:
        q = np.zeros((E.dim, 0), dtype=np.complex128)
    atoms = tuple(
        Atom(atom.label, Form(q.conj().T @ atom.form.entries @ q)) for atom in E.atoms
    )
    return StrictQuotient(DiscretePSFM(atoms, basis.rank), q.conj().T)
