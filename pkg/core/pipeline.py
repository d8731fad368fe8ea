"""
Pipeline Engine - staged PSFM processing
Validation, dilation, pointwise decomposition, direct integral, trace-class
densities and spectral detection, with progress callbacks per stage
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from core.check_report import CheckReport
from core.dilation import NaimarkDilation, dilate, is_spectral, verify_dilation
from core.errors import InputError
from core.form_models import (EPS_PSD, EPS_RANK, EPS_VERIFY, DiscretePSFM,
                              WeightSequence)
from core.pointwise import (DirectIntegralModel, PointwiseDecomposition,
                            decompose, direct_integral_model, onb_check)
from core.psfm import is_semispectral, is_strict, mu, validate
from core.traceclass import cross_check

logger = logging.getLogger(__name__)

STAGES = ('validate', 'dilate', 'verify', 'decompose', 'direct_integral', 'traceclass', 'detect')

# stage -> (percent at start, progress message)
_STAGE_PROGRESS = {
    'validate': (0, "Checking positivity of every atom..."),
    'dilate': (10, "Assembling Gram matrix and dilation..."),
    'verify': (30, "Verifying dilation..."),
    'decompose': (45, "Decomposing atoms pointwise..."),
    'direct_integral': (60, "Building direct-integral model..."),
    'traceclass': (75, "Computing trace-one densities..."),
    'detect': (90, "Running spectral detectors..."),
}


@dataclass
class PipelineResult:
    """Everything the stages produced; stages not run leave their slot empty"""
    psfm: DiscretePSFM
    alpha: WeightSequence
    dilation: Optional[NaimarkDilation] = None
    decomposition: Optional[PointwiseDecomposition] = None
    model: Optional[DirectIntegralModel] = None
    spectral: Optional[bool] = None
    reports: List[CheckReport] = field(default_factory=list)
    cancelled: bool = False

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)


class PipelineEngine:
    """Runs the PSFM stages in order"""

    def __init__(self, psfm: DiscretePSFM, alpha: Optional[WeightSequence] = None,
                 options: Optional[dict] = None):
        self.psfm = psfm
        self.alpha = alpha if alpha is not None else WeightSequence.dyadic(psfm.dim)
        self.options = options or {}

        self.tol_rank = self.options.get('tol_rank', EPS_RANK)
        self.tol_psd = self.options.get('tol_psd', EPS_PSD)
        self.tol_verify = self.options.get('tol_verify', EPS_VERIFY)

        # Callbacks
        self.on_progress: Optional[Callable] = None
        self.on_complete: Optional[Callable] = None
        self.on_error: Optional[Callable] = None

        self.cancelled = False

    def default_stages(self) -> Tuple[str, ...]:
        """Every stage; detect only when E is a normalized POM"""
        if is_semispectral(self.psfm, self.tol_verify):
            return STAGES
        return tuple(stage for stage in STAGES if stage != 'detect')

    def run(self, stages: Optional[Sequence[str]] = None) -> PipelineResult:
        """Execute the requested stages; errors are reported then re-raised"""
        if stages is None:
            stages = self.default_stages()
        unknown = [s for s in stages if s not in STAGES]
        if unknown:
            raise InputError(f"Unknown pipeline stages: {unknown}")
        result = PipelineResult(self.psfm, self.alpha)
        try:
            for stage in STAGES:
                if stage not in stages:
                    continue
                if self.cancelled:
                    logger.warning(f"Pipeline cancelled before stage '{stage}'")
                    result.cancelled = True
                    break
                percent, message = _STAGE_PROGRESS[stage]
                self._report_progress(stage, percent, message)
                getattr(self, f"_stage_{stage}")(result)

            self._report_progress("complete", 100, "Done")
            if self.on_complete:
                self.on_complete(result)
            return result

        except Exception as e:
            logger.error(f"Pipeline failed: {e}")
            if self.on_error:
                self.on_error(str(e))
            raise

    def _stage_validate(self, result: PipelineResult):
        if self.options.get('validate', True):
            validate(self.psfm, self.tol_psd)
        else:
            logger.info("Positivity check deferred to the first construction that needs it")
        measure = mu(self.psfm, self.alpha, self.tol_psd)
        logger.info(f"mu = {measure.weights.tolist()}, strict = {is_strict(self.psfm, self.tol_psd)}")

    def _dilation(self, result: PipelineResult) -> NaimarkDilation:
        if result.dilation is None:
            result.dilation = dilate(self.psfm, self.alpha, self.tol_rank, self.tol_psd)
        return result.dilation

    def _decomposition(self, result: PipelineResult) -> PointwiseDecomposition:
        if result.decomposition is None:
            result.decomposition = decompose(self.psfm, self.alpha, self.tol_rank, self.tol_psd)
        return result.decomposition

    def _stage_dilate(self, result: PipelineResult):
        self._dilation(result)

    def _stage_verify(self, result: PipelineResult):
        report = verify_dilation(self.psfm, self._dilation(result), self.tol_verify, self.tol_psd)
        result.reports.append(report)

    def _stage_decompose(self, result: PipelineResult):
        self._decomposition(result)

    def _stage_direct_integral(self, result: PipelineResult):
        outcome = direct_integral_model(
            self._decomposition(result), self.psfm, self._dilation(result),
            self.tol_verify, rank_tol=self.tol_rank,
        )
        result.model = outcome.model
        result.reports.append(outcome.report)

    def _stage_traceclass(self, result: PipelineResult):
        report = cross_check(self.psfm, self.alpha, self._decomposition(result),
                             self.tol_verify, self.tol_rank, self.tol_psd)
        result.reports.append(report)

    def _stage_detect(self, result: PipelineResult):
        spectral = is_spectral(self.psfm, self._dilation(result), self.tol_verify)
        onb = onb_check(self._decomposition(result), self.psfm, self.tol_verify)
        report = CheckReport('spectral_detection')
        report.flag('detectors_agree', spectral == onb)
        report.details['spectral'] = spectral
        report.details['kdim'] = self._dilation(result).kdim
        result.spectral = spectral
        result.reports.append(report)

    def _report_progress(self, stage: str, percent: float, message: str):
        """Report progress to callback"""
        if self.on_progress:
            self.on_progress(stage, percent, message)

    def cancel(self):
        """Cancel before the next stage"""
        self.cancelled = True
