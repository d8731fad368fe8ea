import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, seed, settings

from core.errors import ContractViolation, InputError
from core.form_models import Form
from core.forms import (cauchy_schwarz_defect, congruence, eps_rank, evaluate,
                        gram_matrix, is_positive, orthonormalize, polarize)
from core.random_models import make_rng, random_vector
from tests.strategies import (positive_forms, positive_forms_with_vectors, seeds,
                              square_matrices)


def test_evaluate_identity():
    assert evaluate(Form.identity(2), [1, 0], [0, 1]) == 0
    assert evaluate(Form.identity(2), [1, 1], [1, 1]) == 2


def test_evaluate_is_antilinear_in_first_slot():
    form = Form(np.array([[0, 1], [1, 0]]))
    assert evaluate(form, [1j, 0], [0, 1]) == pytest.approx(-1j)


def test_evaluate_dimension_mismatch():
    with pytest.raises(InputError):
        evaluate(Form.identity(2), [1, 0, 0], [0, 1])


def test_polarize_identity_round_trip():
    form = Form.identity(2)
    recovered = polarize(lambda v: evaluate(form, v, v), 2)
    np.testing.assert_allclose(recovered.entries, np.eye(2), atol=1e-15)


def test_polarize_square_of_sum():
    recovered = polarize(lambda v: abs(v[0] + v[1]) ** 2, 2)
    np.testing.assert_allclose(recovered.entries, np.ones((2, 2)), atol=1e-15)


def test_polarize_recovers_complex_hermitian():
    M = np.array([[1, 1j], [-1j, 1]])
    recovered = polarize(lambda v: evaluate(Form(M), v, v), 2)
    np.testing.assert_allclose(recovered.entries, M, atol=1e-15)


@seed(11)
@settings(max_examples=1000, deadline=None)
@given(matrix=square_matrices())
def test_polarize_recovers_non_hermitian_forms(matrix):
    form = Form(matrix)
    recovered = polarize(lambda v: evaluate(form, v, v), form.dim)
    np.testing.assert_allclose(recovered.entries, form.entries, atol=1e-12)


def test_is_positive_examples():
    report = is_positive(Form.identity(3))
    assert report.positive
    assert report.min_eigenvalue == pytest.approx(1.0)

    report = is_positive(Form(np.array([[1, 2], [2, 1]])))
    assert not report.positive
    assert report.min_eigenvalue == pytest.approx(-1.0)

    report = is_positive(Form(np.array([[0, 1], [0, 0]])))
    assert not report.positive
    assert report.hermiticity_defect == pytest.approx(1.0)


def test_orthonormalize_rank_one():
    basis = orthonormalize(Form(np.ones((2, 2))))
    assert basis.rank == 1
    assert basis.indices == (0,)
    np.testing.assert_allclose(basis.vectors[:, 0], [1, 0])
    np.testing.assert_allclose(basis.functionals[0], [1, 1])


def test_orthonormalize_identity_and_zero():
    basis = orthonormalize(Form.identity(4))
    assert basis.rank == 4
    np.testing.assert_allclose(basis.vectors, np.eye(4))

    empty = orthonormalize(Form.zeros(3))
    assert empty.rank == 0
    assert empty.vectors.shape == (3, 0)


def test_orthonormalize_rejects_non_positive():
    with pytest.raises(ContractViolation, match="lambda_min"):
        orthonormalize(Form(np.array([[1, 2], [2, 1]])))


@seed(12)
@settings(max_examples=200, deadline=None)
@given(matrix=positive_forms())
def test_orthonormalize_rank_matches_eigenvalue_oracle(matrix):
    form = Form(matrix)
    basis = orthonormalize(form)
    assert basis.rank == eps_rank(form)
    np.testing.assert_allclose(gram_matrix(form, basis.vectors), np.eye(basis.rank), atol=1e-9)
    # functionals reproduce the form
    reconstructed = basis.functionals.conj().T @ basis.functionals
    np.testing.assert_allclose(reconstructed, form.entries, atol=1e-9 * form.max_norm)


def test_congruence_on_degenerate_direction():
    form = Form(np.ones((2, 2)))
    pulled = congruence(form, np.array([[1], [-1]]))
    np.testing.assert_allclose(pulled.entries, [[0]])

    # e_0, e_1 and the null direction e_0 - e_1 span a rank-one pullback
    pulled = congruence(form, np.array([[1, 0, 1], [0, 1, -1]]))
    assert eps_rank(pulled) == 1
    assert orthonormalize(pulled).rank == 1


@seed(13)
@settings(max_examples=200, deadline=None)
@given(matrix=positive_forms(), seed_value=seeds)
def test_congruence_ignores_appended_null_directions(matrix, seed_value):
    form = Form(matrix)
    rng = make_rng(seed_value)
    null_space = scipy.linalg.null_space(matrix, rcond=1e-9)
    direction = null_space @ random_vector(rng, null_space.shape[1]) if null_space.shape[1] else np.zeros(form.dim)
    basis = np.column_stack([np.eye(form.dim), direction])

    pulled = congruence(form, basis)
    rank = eps_rank(form)
    assert eps_rank(pulled) == rank
    assert orthonormalize(pulled).rank == rank
    assert orthonormalize(pulled).indices == orthonormalize(form).indices


@seed(14)
@settings(max_examples=1000, deadline=None)
@given(case=positive_forms_with_vectors())
def test_cauchy_schwarz_holds_for_positive_forms(case):
    matrix, phi, psi = case
    form = Form(matrix)
    scale = evaluate(form, phi, phi).real * evaluate(form, psi, psi).real
    assert cauchy_schwarz_defect(form, phi, psi) <= 1e-9 * max(scale, 1.0)
