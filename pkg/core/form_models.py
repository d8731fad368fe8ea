"""
Form Data Models
Sesquilinear forms on V_N = span(e_0..e_{N-1}) and discrete form measures
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InputError

# Default tolerances
EPS_RANK = 1e-10    # Gram-Schmidt zero test, relative to max diagonal
EPS_PSD = 1e-10     # positivity test, relative to max |entry|
EPS_VERIFY = 1e-10  # verifier defects, relative to ||E_Omega||_max

AtomSelector = Union[int, str]


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Read-only complex128 square matrix"""
    matrix = np.array(values, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"{name} must be square, got shape {matrix.shape}")
    matrix.setflags(write=False)
    return matrix


def as_vector(values, dim: int, name: str = "vector") -> np.ndarray:
    """Complex coefficient vector of length dim"""
    vector = np.asarray(values, dtype=np.complex128)
    if vector.shape != (dim,):
        raise InputError(f"{name} must have length {dim}, got shape {vector.shape}")
    return vector


def resolve_atoms(labels: Sequence[str], subset: Optional[Iterable[AtomSelector]]) -> List[int]:
    """Sorted atom indices for labels or indices; None selects every atom"""
    if subset is None:
        return list(range(len(labels)))
    lookup = {label: i for i, label in enumerate(labels)}
    indices = set()
    for item in subset:
        if isinstance(item, str):
            if item not in lookup:
                raise InputError(f"Unknown atom label '{item}'")
            indices.add(lookup[item])
        else:
            index = int(item)
            if not 0 <= index < len(labels):
                raise InputError(f"Atom index {index} out of range 0..{len(labels) - 1}")
            indices.add(index)
    return sorted(indices)


@dataclass(frozen=True, eq=False)
class Form:
    """Sesquilinear form given by its values M[m][n] = Phi(e_m, e_n)"""
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'entries', as_matrix(self.entries, "form entries"))

    @classmethod
    def zeros(cls, dim: int) -> "Form":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "Form":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def max_norm(self) -> float:
        """||M||_max"""
        return float(np.max(np.abs(self.entries))) if self.dim else 0.0

    def hermitian_part(self) -> np.ndarray:
        return 0.5 * (self.entries + self.entries.conj().T)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def __add__(self, other: "Form") -> "Form":
        return Form(self.entries + other.entries)

    def scaled(self, factor: float) -> "Form":
        return Form(self.entries * factor)


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of a positivity test with its diagnostics"""
    positive: bool
    min_eigenvalue: float
    hermiticity_defect: float


@dataclass(frozen=True, eq=False)
class QuotientBasis:
    """Orthonormal basis of V/N for a positive form

    vectors[:, k] is the Gram-Schmidt survivor g_k, functionals[k] is the row
    evaluating phi -> Phi(g_k, phi), indices[k] is the basis index n_k that
    produced g_k.
    """
    rank: int
    vectors: np.ndarray
    functionals: np.ndarray
    indices: Tuple[int, ...]

    def coordinates(self, phi) -> np.ndarray:
        """Coordinates of [phi] in the quotient"""
        return self.functionals @ np.asarray(phi, dtype=np.complex128)


@dataclass(frozen=True)
class Atom:
    """One outcome omega with its positive form E_{omega}"""
    label: str
    form: Form


@dataclass(frozen=True, eq=False)
class DiscretePSFM:
    """Positive sesquilinear form measure over a finite atomic outcome space"""
    atoms: Tuple[Atom, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, 'atoms', tuple(self.atoms))
        labels = [atom.label for atom in self.atoms]
        if len(set(labels)) != len(labels):
            raise InputError(f"Duplicate atom labels: {labels}")
        for atom in self.atoms:
            if atom.form.dim != self.dim:
                raise InputError(
                    f"Atom '{atom.label}' has dimension {atom.form.dim}, expected {self.dim}"
                )

    @classmethod
    def from_matrices(cls, matrices: Sequence, labels: Optional[Sequence[str]] = None,
                      dim: Optional[int] = None) -> "DiscretePSFM":
        """Build from a list of square matrices"""
        forms = [Form(m) for m in matrices]
        if labels is None:
            labels = [f"w{i}" for i in range(len(forms))]
        if len(labels) != len(forms):
            raise InputError(f"{len(labels)} labels for {len(forms)} atoms")
        if dim is None:
            if not forms:
                raise InputError("Cannot infer dimension of an empty measure")
            dim = forms[0].dim
        return cls(tuple(Atom(label, form) for label, form in zip(labels, forms)), dim)

    @property
    def size(self) -> int:
        """Number of atoms M"""
        return len(self.atoms)

    @property
    def labels(self) -> List[str]:
        return [atom.label for atom in self.atoms]

    @property
    def forms(self) -> List[Form]:
        return [atom.form for atom in self.atoms]

    def resolve(self, subset: Optional[Iterable[AtomSelector]] = None) -> List[int]:
        """Atom indices for a subset given by labels or indices; None means Omega"""
        return resolve_atoms(self.labels, subset)

    def restrict(self, subset: Optional[Iterable[AtomSelector]] = None) -> Form:
        """E_X: entrywise sum of member atom forms"""
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for i in self.resolve(subset):
            total = total + self.atoms[i].form.entries
        return Form(total)

    def total(self) -> Form:
        """E_Omega"""
        return self.restrict(None)

    def get_summary(self) -> str:
        """Human-readable summary"""
        parts = [f"dim={self.dim}", f"atoms={self.size}"]
        parts.append(f"||E_Omega||_max={self.total().max_norm:.3g}")
        return " | ".join(parts)


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Positive summable weights alpha_0..alpha_{N-1}"""
    alphas: np.ndarray

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype=float).reshape(-1)
        if alphas.size == 0 or np.any(~np.isfinite(alphas)) or np.any(alphas <= 0):
            raise InputError(f"Weights must be finite and positive, got {alphas.tolist()}")
        alphas.setflags(write=False)
        object.__setattr__(self, 'alphas', alphas)

    @classmethod
    def dyadic(cls, dim: int) -> "WeightSequence":
        """alpha_n = 2^-(n+1)"""
        return cls.geometric(dim, 2.0)

    @classmethod
    def geometric(cls, dim: int, base: float) -> "WeightSequence":
        """alpha_n = base^-(n+1)"""
        if base <= 1:
            raise InputError(f"Geometric weight base must exceed 1, got {base}")
        return cls(float(base) ** -(np.arange(dim) + 1.0))

    def truncate(self, dim: int) -> np.ndarray:
        """First dim weights"""
        if self.alphas.size < dim:
            raise InputError(f"Need {dim} weights, only {self.alphas.size} given")
        return self.alphas[:dim]


@dataclass(frozen=True, eq=False)
class MuMeasure:
    """Per-atom weights mu({omega})"""
    weights: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if np.any(weights < 0) or np.any(~np.isfinite(weights)):
            raise InputError(f"Measure weights must be finite and nonnegative, got {weights.tolist()}")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'labels', tuple(self.labels))

    @property
    def total(self) -> float:
        """mu(Omega)"""
        return float(np.sum(self.weights))

    def null_atoms(self) -> List[int]:
        return [i for i, w in enumerate(self.weights) if w == 0.0]

    def of(self, indices: Iterable[int]) -> float:
        """mu(X) for atom indices X"""
        return float(sum(self.weights[i] for i in indices))
