"""
Random Models - seeded generators for the randomized suites
Every generator takes a numpy Generator so runs are reproducible from a seed
"""

from typing import Tuple

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from core.form_models import DiscretePSFM
from core.shifts import ShiftWeights


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)


def random_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_positive(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    """A A^H with A of shape dim x rank"""
    A = random_matrix(rng, dim, rank)
    return A @ A.conj().T


def random_psfm(rng: np.random.Generator, dim: int, atoms: int,
                null_atoms: int = 0) -> DiscretePSFM:
    """
    Random positive atoms of random rank; the first null_atoms atoms are zero

    Ranks range over 1..dim so that nonstrict and rank-deficient cases occur.
    """
    matrices = []
    for i in range(atoms):
        if i < null_atoms:
            matrices.append(np.zeros((dim, dim)))
            continue
        rank = int(rng.integers(1, dim + 1))
        matrices.append(random_positive(rng, dim, rank) * rng.uniform(0.1, 2.0))
    return DiscretePSFM.from_matrices(matrices, dim=dim)


def random_pom(rng: np.random.Generator, dim: int, atoms: int) -> DiscretePSFM:
    """Normalized POM: B_i congruenced by S^{-1/2}, S = sum B_i, so sum E_i = I"""
    blocks = [random_positive(rng, dim, dim) for _ in range(atoms)]
    total = sum(blocks)
    eigenvalues, vectors = scipy.linalg.eigh(total)
    inverse_root = vectors @ np.diag(eigenvalues ** -0.5) @ vectors.conj().T
    matrices = []
    for B in blocks:
        E = inverse_root @ B @ inverse_root
        matrices.append(0.5 * (E + E.conj().T))
    return DiscretePSFM.from_matrices(matrices, dim=dim)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    A = random_matrix(rng, dim, dim)
    return 0.5 * (A + A.conj().T)


def random_spectral(rng: np.random.Generator, dim: int) -> DiscretePSFM:
    """Eigenprojections of a random Hermitian matrix"""
    _, vectors = scipy.linalg.eigh(random_hermitian(rng, dim))
    matrices = [np.outer(v, v.conj()) for v in vectors.T]
    return DiscretePSFM.from_matrices(matrices, dim=dim)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.exp(2j * np.pi * rng.random((1, 1)))


def random_normal(rng: np.random.Generator, dim: int, distinct: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    U diag(lambda) U^H and its eigenvalues

    With distinct > 0 the eigenvalues are drawn from that many points, so
    repeated eigenvalues occur.
    """
    if distinct > 0:
        pool = random_vector(rng, distinct)
        eigenvalues = pool[rng.integers(0, distinct, size=dim)]
    else:
        eigenvalues = random_vector(rng, dim)
    U = random_unitary(rng, dim)
    return U @ np.diag(eigenvalues) @ U.conj().T, eigenvalues


def random_shift_weights(rng: np.random.Generator, window: int, max_modulus: float = 1.3) -> ShiftWeights:
    """Weights with moduli uniform on [0, max_modulus] and random phases"""
    moduli = rng.uniform(0.0, max_modulus, size=2 * window)
    phases = rng.uniform(0.0, 2 * np.pi, size=2 * window)
    return ShiftWeights(window, moduli * np.exp(1j * phases))
