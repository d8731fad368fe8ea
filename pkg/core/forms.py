"""
Forms - sesquilinear form algebra on the finite test space
Evaluation, polarization, positivity testing and the Gram-Schmidt quotient
"""

import logging
from typing import Callable

import numpy as np
import scipy.linalg

from core.errors import ContractViolation, InputError
from core.form_models import (EPS_PSD, EPS_RANK, Form, PositivityReport,
                              QuotientBasis, as_vector)

logger = logging.getLogger(__name__)

# i^0, i^1, i^2, i^3
_UNIT_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def evaluate(form: Form, phi, psi) -> complex:
    """Phi(phi, psi) = sum conj(a_m) M[m][n] b_n"""
    phi = as_vector(phi, form.dim, "phi")
    psi = as_vector(psi, form.dim, "psi")
    return complex(np.vdot(phi, form.entries @ psi))


def polarize(diag: Callable[[np.ndarray], complex], dim: int) -> Form:
    """
    Recover a sesquilinear form from its quadratic values

    Phi(e_m, e_n) = 1/4 sum_k i^k diag(i^k e_m + e_n), which is the
    polarization identity written for forms antilinear in the first slot.
    """
    if dim < 0:
        raise InputError(f"Dimension must be nonnegative, got {dim}")
    eye = np.eye(dim, dtype=np.complex128)
    entries = np.zeros((dim, dim), dtype=np.complex128)
    for m in range(dim):
        for n in range(dim):
            total = 0j
            for unit in _UNIT_POWERS:
                total += unit * complex(diag(unit * eye[m] + eye[n]))
            entries[m, n] = 0.25 * total
    return Form(entries)


def is_positive(form: Form, tol: float = EPS_PSD) -> PositivityReport:
    """
    Hermiticity and eigenvalue test, relative to ||M||_max

    The diagnostic (lambda_min of the Hermitian part, Hermiticity defect) is
    always reported.
    """
    if form.dim == 0:
        return PositivityReport(True, 0.0, 0.0)
    scale = form.max_norm
    defect = float(np.max(np.abs(form.entries - form.entries.conj().T)))
    lam_min = float(scipy.linalg.eigh(form.hermitian_part(), eigvals_only=True)[0])
    positive = defect <= tol * scale and lam_min >= -tol * scale
    return PositivityReport(positive, lam_min, defect)


def eps_rank(form: Form, tol: float = EPS_RANK) -> int:
    """Number of eigenvalues above tol * ||M||_max"""
    if form.dim == 0 or form.max_norm == 0.0:
        return 0
    eigenvalues = scipy.linalg.eigh(form.hermitian_part(), eigvals_only=True)
    return int(np.sum(eigenvalues > tol * form.max_norm))


def congruence(form: Form, basis) -> Form:
    """Pulled-back form B^H M B on the span of the columns of B"""
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.ndim != 2 or basis.shape[0] != form.dim:
        raise InputError(f"Basis must have {form.dim} rows, got shape {basis.shape}")
    return Form(basis.conj().T @ form.entries @ basis)


def cauchy_schwarz_defect(form: Form, phi, psi) -> float:
    """|Phi(phi,psi)|^2 - Phi(phi,phi) Phi(psi,psi); nonpositive for positive forms"""
    cross = evaluate(form, phi, psi)
    return abs(cross) ** 2 - evaluate(form, phi, phi).real * evaluate(form, psi, psi).real


def orthonormalize(form: Form, tol: float = EPS_RANK, psd_tol: float = EPS_PSD,
                   check: bool = True) -> QuotientBasis:
    """
    Gram-Schmidt in the inner product of a positive form

    f_n = {e_n - sum_{k<n} Phi(f_k, e_n) f_k}^0 where {v}^0 normalizes v when
    Phi(v, v) > tol * max diag M and is zero otherwise. Zero vectors are
    skipped; the survivors g_k and their functionals phi -> Phi(g_k, phi)
    span V modulo the null space. One re-orthogonalization pass follows the
    classical step.
    """
    if check:
        report = is_positive(form, psd_tol)
        if not report.positive:
            raise ContractViolation(
                f"Gram-Schmidt needs a positive form: lambda_min={report.min_eigenvalue:.3e}, "
                f"hermiticity defect={report.hermiticity_defect:.3e}"
            )

    dim = form.dim
    hermitian = form.hermitian_part()
    diagonal = np.real(np.diag(hermitian))
    threshold = tol * float(np.max(diagonal)) if dim else 0.0

    survivors = np.zeros((dim, 0), dtype=np.complex128)
    images = np.zeros((dim, 0), dtype=np.complex128)  # H @ survivors
    indices = []

    for n in range(dim):
        v = np.zeros(dim, dtype=np.complex128)
        v[n] = 1.0
        for _ in range(2):
            if survivors.shape[1]:
                v = v - survivors @ (images.conj().T @ v)
        norm2 = float(np.real(np.vdot(v, hermitian @ v)))
        if norm2 > threshold and norm2 > 0.0:
            g = v / np.sqrt(norm2)
            survivors = np.column_stack([survivors, g])
            images = np.column_stack([images, hermitian @ g])
            indices.append(n)
        else:
            logger.debug(f"Gram-Schmidt: e_{n} falls in the null space (norm^2={norm2:.3e})")
            if threshold > 0 and abs(norm2) > 0.01 * threshold and norm2 <= threshold:
                logger.warning(
                    f"Borderline rank decision at e_{n}: norm^2={norm2:.3e}, threshold={threshold:.3e}"
                )

    functionals = images.conj().T
    survivors.setflags(write=False)
    functionals.setflags(write=False)
    return QuotientBasis(len(indices), survivors, functionals, tuple(indices))


def gram_matrix(form: Form, vectors) -> np.ndarray:
    """Matrix of Phi(v_k, v_l) for the columns of vectors"""
    return congruence(form, vectors).entries


def max_defect(a, b) -> float:
    """max |a - b| entrywise, 0 for empty arrays"""
    diff = np.abs(np.asarray(a) - np.asarray(b))
    return float(np.max(diff)) if diff.size else 0.0
