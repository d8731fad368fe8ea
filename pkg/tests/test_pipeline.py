import numpy as np
import pytest

from core.errors import ContractViolation, InputError, PreconditionError
from core.form_models import DiscretePSFM
from core.pipeline import STAGES, PipelineEngine
from core.random_models import random_pom, random_psfm


def test_full_pipeline_on_pom(rng):
    E = random_pom(rng, 3, 4)
    progress = []
    engine = PipelineEngine(E)
    engine.on_progress = lambda stage, percent, message: progress.append((stage, percent))
    result = engine.run()
    assert result.passed
    assert result.spectral is False
    assert result.dilation.kdim == result.model.kdim == sum(result.decomposition.ranks)
    assert [stage for stage, _ in progress] == list(STAGES) + ["complete"]
    assert progress[-1][1] == 100
    assert [r.name for r in result.reports] == ['dilation', 'direct_integral', 'traceclass', 'spectral_detection']


def test_partial_stages(rng):
    E = random_psfm(rng, 3, 2)
    result = PipelineEngine(E).run(('decompose',))
    assert result.decomposition is not None
    assert result.dilation is None
    assert result.reports == []


def test_unknown_stage():
    E = DiscretePSFM.from_matrices([np.eye(1)])
    with pytest.raises(InputError, match="Unknown"):
        PipelineEngine(E).run(('dilate', 'plot'))


def test_error_callback_and_reraise():
    E = DiscretePSFM.from_matrices([[[-1.0]]])
    errors = []
    engine = PipelineEngine(E)
    engine.on_error = errors.append
    with pytest.raises(ContractViolation):
        engine.run(('validate', 'dilate'))
    assert errors and "not positive" in errors[0]


def test_deferred_validation_still_rejects():
    E = DiscretePSFM.from_matrices([[[1.0, 2.0], [2.0, 1.0]], np.eye(2)])
    engine = PipelineEngine(E, options={'validate': False})
    with pytest.raises(ContractViolation):
        engine.run(('validate', 'dilate'))


def test_cancel_before_next_stage(two_atom):
    engine = PipelineEngine(two_atom)
    completed = []
    engine.on_progress = lambda stage, percent, message: engine.cancel() if stage == 'dilate' else None
    engine.on_complete = completed.append
    result = engine.run(('validate', 'dilate', 'verify'))
    assert result.cancelled
    assert result.dilation is not None
    assert result.reports == []
    assert completed[0] is result


def test_acceptance_sweep(rng):
    for _ in range(50):
        E = random_psfm(rng, int(rng.integers(1, 7)), int(rng.integers(1, 9)))
        result = PipelineEngine(E).run(('dilate', 'verify', 'decompose', 'direct_integral', 'traceclass'))
        assert result.passed, [r.failures() for r in result.reports]


def test_mixed_scale_atoms_keep_matching_ranks():
    E = DiscretePSFM.from_matrices([np.eye(2), np.diag([1e-9, 1e-11])])
    result = PipelineEngine(E).run()
    assert result.decomposition.ranks == [2, 2]
    assert result.dilation.kdim == result.model.kdim == 4
    assert result.passed, [r.failures() for r in result.reports]


def test_default_run_skips_detect_for_non_pom():
    E = DiscretePSFM.from_matrices([[[0.5]], [[0.75]]])
    progress = []
    engine = PipelineEngine(E)
    engine.on_progress = lambda stage, percent, message: progress.append(stage)
    result = engine.run()
    assert 'detect' not in progress
    assert result.spectral is None
    assert [r.name for r in result.reports] == ['dilation', 'direct_integral', 'traceclass']
    assert result.passed

    with pytest.raises(PreconditionError):
        PipelineEngine(E).run(('dilate', 'detect'))
