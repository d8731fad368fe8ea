"""
Trace Class - the Lambda operator, the H_gamma scale and trace-one densities
Two independent routes to T(omega): from the pointwise decomposition and
directly from the operator measure
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg

from core.check_report import CheckReport
from core.errors import ConsistencyError
from core.form_models import (EPS_PSD, EPS_RANK, DiscretePSFM, Form,
                              WeightSequence, as_vector)
from core.forms import max_defect, orthonormalize
from core.pointwise import PointwiseDecomposition, decompose
from core.psfm import betas, mu

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LambdaOperator:
    """Diagonal operator Lambda = sum beta_n |e_n><e_n|"""
    betas: np.ndarray

    def power(self, gamma: float) -> np.ndarray:
        """Matrix of Lambda^gamma"""
        return np.diag(self.betas ** gamma).astype(np.complex128)

    @property
    def trace(self) -> float:
        return float(np.sum(self.betas))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """T(omega) = sum_k |h_k><h_k| for one atom"""
    label: str
    T: np.ndarray
    h_vectors: np.ndarray
    mu: float

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.T)))

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of T, descending"""
        if not self.T.size:
            return np.zeros(0)
        return scipy.linalg.eigh(0.5 * (self.T + self.T.conj().T), eigvals_only=True)[::-1]

    def rank(self, tol: float = EPS_RANK, lam: Optional[LambdaOperator] = None) -> int:
        """
        Gram-Schmidt rank with the tol * max diag cutoff

        With lam the test runs on Lambda^{-1/2} T Lambda^{-1/2}, which is
        C_omega itself, so the count matches the pointwise n(omega).
        """
        if not self.T.size:
            return 0
        entries = self.T
        if lam is not None:
            inverse_root = 1.0 / np.sqrt(lam.betas)
            entries = inverse_root[:, None] * entries * inverse_root[None, :]
        return orthonormalize(Form(0.5 * (entries + entries.conj().T)), tol, check=False).rank


def lambda_operator(E: DiscretePSFM, alpha: WeightSequence) -> LambdaOperator:
    """beta_n = alpha_n / (1 + E_Omega(e_n, e_n))"""
    return LambdaOperator(betas(E, alpha))


def h_gamma_norm(phi, lam: LambdaOperator, gamma: float) -> float:
    """||phi||_{H_gamma} = sqrt(sum |a_n|^2 / beta_n^gamma)"""
    phi = as_vector(phi, lam.betas.size, "phi")
    return float(np.sqrt(np.sum(np.abs(phi) ** 2 / lam.betas ** gamma)))


def density_operators(P: PointwiseDecomposition, lam: LambdaOperator,
                      tol: float = TRACE_TOL) -> List[DensityOperator]:
    """
    T(omega) = sum_k Lambda^{1/2} |d_k><d_k| Lambda^{1/2}

    h_k(omega) is the Riesz vector of phi -> <d_k(omega) | Lambda^{1/2} phi>.
    Every mu-positive atom must have trace one.
    """
    root = np.sqrt(lam.betas)
    operators = []
    for atom in P.atoms:
        h = (atom.d_rows * root).conj().T
        T = h @ h.conj().T
        operator = DensityOperator(atom.label, T, h, atom.mu)
        if atom.mu > 0 and abs(operator.trace - 1.0) > tol:
            raise ConsistencyError(f"Atom '{atom.label}': tr T = {operator.trace:.17g}, expected 1")
        operators.append(operator)
    return operators


def pom_density_route(E: DiscretePSFM, alpha: WeightSequence,
                      rank_tol: float = EPS_RANK, psd_tol: float = EPS_PSD) -> List[DensityOperator]:
    """
    T(omega) = Lambda^{1/2} E_0({omega}) Lambda^{1/2} / mu({omega})

    h-vectors come from the eigendecomposition of T(omega), eigenvalues
    descending, so ||h_k|| is nonincreasing and the h_k are orthogonal.
    """
    lam = lambda_operator(E, alpha)
    measure = mu(E, alpha, psd_tol)
    root = np.sqrt(lam.betas)
    operators = []
    for atom, weight in zip(E.atoms, measure.weights):
        if weight == 0.0:
            operators.append(DensityOperator(atom.label, np.zeros((E.dim, E.dim), dtype=np.complex128),
                                             np.zeros((E.dim, 0), dtype=np.complex128), 0.0))
            continue
        F = root[:, None] * atom.form.entries * root[None, :]
        T = F / weight
        eigenvalues, vectors = scipy.linalg.eigh(0.5 * (T + T.conj().T))
        order = np.argsort(eigenvalues)[::-1]
        eigenvalues, vectors = eigenvalues[order], vectors[:, order]
        keep = eigenvalues > rank_tol * max(eigenvalues[0], 0.0)
        h = vectors[:, keep] * np.sqrt(eigenvalues[keep])
        operators.append(DensityOperator(atom.label, T, h, float(weight)))
    return operators


def extended_form(operator: DensityOperator, lam: LambdaOperator, phi, psi) -> complex:
    """C_omega(phi, psi) = <Lambda^{-1/2} phi | T(omega) Lambda^{-1/2} psi>, defined on H_1"""
    inverse_root = 1.0 / np.sqrt(lam.betas)
    a = as_vector(phi, lam.betas.size, "phi") * inverse_root
    b = as_vector(psi, lam.betas.size, "psi") * inverse_root
    return complex(np.vdot(a, operator.T @ b))


def cross_check(E: DiscretePSFM, alpha: WeightSequence, P: Optional[PointwiseDecomposition] = None,
                tol: float = TRACE_TOL, rank_tol: float = EPS_RANK,
                psd_tol: float = EPS_PSD) -> CheckReport:
    """Compare the decomposition route with the operator-measure route"""
    if P is None:
        P = decompose(E, alpha, rank_tol, psd_tol)
    lam = lambda_operator(E, alpha)
    from_decomposition = density_operators(P, lam, tol)
    from_pom = pom_density_route(E, alpha, rank_tol, psd_tol)
    measure = P.measure

    report = CheckReport('traceclass')
    scale = E.total().max_norm or 1.0
    inverse_root = 1.0 / np.sqrt(lam.betas)
    atoms = []
    weighted_trace = 0.0
    for atom, via_rows, via_pom, decomposition in zip(E.atoms, from_decomposition, from_pom, P.atoms):
        report.record('routes_agree', max_defect(via_rows.T, via_pom.T), tol)
        if via_rows.mu > 0:
            report.record('trace_one', abs(via_rows.trace - 1.0), tol)
            report.record('trace_one', abs(via_pom.trace - 1.0), tol)
            report.flag('rank', via_rows.rank(rank_tol, lam) == decomposition.rank)

            recovered = inverse_root[:, None] * via_pom.T * inverse_root[None, :] * via_pom.mu
            report.record('pom_reconstruction', max_defect(recovered, atom.form.entries), tol * scale)

            bound = np.sum(np.abs(decomposition.d_rows) ** 2 * lam.betas[None, :], axis=1)
            report.record('h1_bound', float(np.max(bound - 1.0, initial=0.0)), tol)

            report.flag('h_independent', int(np.linalg.matrix_rank(via_rows.h_vectors)) == decomposition.rank)
            norms = np.linalg.norm(via_pom.h_vectors, axis=0)
            report.flag('h_ordering', bool(np.all(np.diff(norms) <= tol)) and bool(np.all(norms > 0)))
            gram = via_pom.h_vectors.conj().T @ via_pom.h_vectors
            report.record('h_orthogonal', max_defect(gram, np.diag(np.diag(gram))), tol)
        weighted_trace += via_rows.trace * via_rows.mu
        atoms.append({
            'label': atom.label,
            'mu': via_rows.mu,
            'trace': via_rows.trace,
            'rank': via_rows.rank(rank_tol, lam),
            'eigenvalues': via_rows.eigenvalues().tolist(),
        })

    report.record('mu_total', abs(weighted_trace - measure.total), tol * max(1.0, measure.total))

    variation = sum(float(np.real(np.trace(op.T))) * op.mu for op in from_pom)
    operator_norm = float(np.linalg.norm(E.total().entries, 2)) if E.dim else 0.0
    report.details['total_variation'] = variation
    report.details['variation_bound'] = lam.trace * operator_norm
    report.flag('total_variation', variation <= lam.trace * operator_norm + tol)
    report.details['atoms'] = atoms

    if not report.passed:
        logger.warning(f"Trace-class cross-check failed: {report.failures()}")
    return report
