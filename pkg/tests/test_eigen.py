import numpy as np
import pytest
import scipy.sparse

from core.eigen import (OperatorMatrix, eigenpair_check, haar_recovery,
                        shift_eigensolve, spectral_expand, tilde_apply,
                        weighted_size_check)
from core.errors import AliasingError, InputError, PreconditionError
from core.random_models import random_normal, random_unitary
from core.shifts import ShiftWeights


def test_shift_tilde_moves_coefficients():
    lam = 0.5 + 0.5j
    S = OperatorMatrix.shift(3)
    d = lam ** np.arange(-3, 4).astype(complex)
    interior = [n for n, ok in zip(S.indices, S.complete_rows) if ok]
    assert interior == [-3, -2, -1, 0, 1, 2]
    np.testing.assert_allclose(tilde_apply(S, d, interior), lam * d[:-1])


def test_tilde_identity_and_diagonal():
    d = np.array([1.0, -2.0, 3j])
    np.testing.assert_allclose(tilde_apply(OperatorMatrix(np.eye(3)), d), d)
    np.testing.assert_allclose(tilde_apply(OperatorMatrix(np.diag([2.0, 3.0, 4.0])), d), [2.0, -6.0, 12j])


def test_tilde_rejects_incomplete_rows():
    S = OperatorMatrix.shift(2)
    with pytest.raises(InputError, match="outside the window"):
        tilde_apply(S, np.ones(5), [2])
    with pytest.raises(InputError):
        tilde_apply(S, np.ones(4))


def test_sparse_operator_keeps_csr():
    T = OperatorMatrix(scipy.sparse.csr_matrix(np.diag([1.0, 2.0])))
    assert scipy.sparse.issparse(T.entries)
    np.testing.assert_allclose(tilde_apply(T, [1.0, 1.0]), [1.0, 2.0])
    assert T.finite


def test_shift_eigensolve_examples():
    solution = shift_eigensolve(1.0, 4)
    np.testing.assert_allclose(solution.coefficients, np.ones(9))
    assert solution.residual == 0.0
    assert solution.simultaneous
    assert shift_eigensolve(0.0, 4) is None


def test_shift_eigensolve_off_circle_is_not_simultaneous():
    solution = shift_eigensolve(0.5, 3)
    assert solution.residual < 1e-12
    assert not solution.simultaneous


def test_weighted_shift_adjoint_band():
    w = ShiftWeights(1, [0.5, 2.0])
    S = OperatorMatrix.shift(1, w)
    adjoint = S.adjoint()
    assert adjoint.band == (1, 0)
    np.testing.assert_allclose(adjoint.dense(), S.dense().conj().T)
    with pytest.raises(InputError):
        OperatorMatrix.shift(2, w)


def test_expand_diagonal():
    system = spectral_expand(OperatorMatrix(np.diag([1.0, 2.0])))
    np.testing.assert_allclose(system.points, [1.0, 2.0])
    assert system.multiplicities == (1, 1)
    assert system.report.passed, system.report.failures()
    assert system.report.max_defects['expansion'] < 1e-14


def test_expand_swap_matrix():
    system = spectral_expand(OperatorMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
    np.testing.assert_allclose(system.points, [-1.0, 1.0], atol=1e-14)
    for j, sign in ((0, -1.0), (1, 1.0)):
        v = system.eigenvectors(j)[:, 0]
        expected = np.array([1.0, sign]) / np.sqrt(2)
        assert abs(np.vdot(expected, v / np.linalg.norm(v))) == pytest.approx(1.0)
    assert system.report.checks['real_points']
    assert system.report.checks['unit_circle']


def test_expand_random_normal_matrices(rng):
    """Residuals stay below 1e-9, repeated eigenvalues included"""
    for case in range(100):
        dim = int(rng.integers(1, 9))
        distinct = int(rng.integers(1, dim + 1)) if case % 2 else 0
        matrix, eigenvalues = random_normal(rng, dim, distinct)
        system = spectral_expand(OperatorMatrix(matrix))
        assert system.report.passed, system.report.failures()
        assert len(system.points) == len(set(np.round(eigenvalues, 8)))
        assert sum(system.multiplicities) == dim


def test_expand_unitary_points_on_circle(rng):
    system = spectral_expand(OperatorMatrix(random_unitary(rng, 6)))
    assert system.report.checks['unit_circle']


def test_expand_rejects_non_normal():
    with pytest.raises(PreconditionError, match="not normal"):
        spectral_expand(OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_expand_rejects_truncations():
    with pytest.raises(InputError):
        spectral_expand(OperatorMatrix.shift(2))


def test_eigenpairs_and_weighted_size(rng):
    matrix, _ = random_normal(rng, 5)
    T = OperatorMatrix(matrix)
    assert eigenpair_check(T).passed
    system = spectral_expand(T)
    report = weighted_size_check(system, 1.0 / (1.0 + np.arange(5)))
    assert report.passed
    assert len(report.details['weighted_sizes']) == 5
    with pytest.raises(InputError):
        weighted_size_check(system, np.ones(3))


def test_haar_recovery_passes():
    report = haar_recovery(8, 64)
    assert report.passed, report.failures()
    assert report.max_defects['fourier_orthogonality'] < 1e-14
    assert report.max_defects['full_circle'] < 1e-14


def test_haar_small_grid_orthogonality():
    report = haar_recovery(1, 16, arcs=[(0, 8)])
    assert report.max_defects['fourier_orthogonality'] < 1e-15
    assert report.passed


def test_haar_aliasing():
    with pytest.raises(AliasingError):
        haar_recovery(8, 16)
    with pytest.raises(InputError):
        haar_recovery(1, 16, arcs=[(4, 2)])
