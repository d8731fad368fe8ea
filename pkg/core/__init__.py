"""
Core package for the PSFM toolkit
"""

from core.check_report import CheckReport
from core.dilation import NaimarkDilation, dilate, is_spectral, verify_dilation
from core.errors import (AliasingError, ConsistencyError, ContractViolation,
                         InputError, PreconditionError, PSFMError)
from core.form_models import DiscretePSFM, Form, MuMeasure, WeightSequence
from core.pipeline import PipelineEngine, PipelineResult
from core.pointwise import PointwiseDecomposition, decompose, direct_integral_model

__all__ = [
    'CheckReport',
    'NaimarkDilation',
    'dilate',
    'is_spectral',
    'verify_dilation',
    'AliasingError',
    'ConsistencyError',
    'ContractViolation',
    'InputError',
    'PreconditionError',
    'PSFMError',
    'DiscretePSFM',
    'Form',
    'MuMeasure',
    'WeightSequence',
    'PipelineEngine',
    'PipelineResult',
    'PointwiseDecomposition',
    'decompose',
    'direct_integral_model',
]
