"""
Run configuration - tolerances, weight sequence, output and seed
"""

import logging
import math
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np

from core.errors import InputError
from core.form_models import EPS_PSD, EPS_RANK, EPS_VERIFY, WeightSequence

logger = logging.getLogger(__name__)

TOL_ENV_VAR = "PSFM_TOL"


def _positive_tolerance(name: str, value: float) -> float:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be a positive number, got {value!r}")
    return float(value)


@dataclass
class RunConfig:
    """Settings shared by every subcommand; echoed in each report"""
    tol_rank: float = EPS_RANK
    tol_psd: float = EPS_PSD
    tol_verify: float = EPS_VERIFY
    alpha_spec: str = "dyadic"
    output: Optional[str] = None
    seed: int = 0
    validate: bool = True

    def __post_init__(self):
        self.tol_rank = _positive_tolerance("tol_rank", self.tol_rank)
        self.tol_psd = _positive_tolerance("tol_psd", self.tol_psd)
        self.tol_verify = _positive_tolerance("tol_verify", self.tol_verify)
        self.weights(1)  # reject malformed alpha specs up front

    @classmethod
    def from_args(cls, args, environ: Optional[Mapping[str, str]] = None) -> "RunConfig":
        """Build from parsed flags; PSFM_TOL overrides tol_verify"""
        environ = os.environ if environ is None else environ
        tol_verify = args.tol_verify
        override = environ.get(TOL_ENV_VAR)
        if override:
            try:
                tol_verify = float(override)
            except ValueError:
                raise InputError(f"{TOL_ENV_VAR} must be a number, got '{override}'") from None
            logger.info(f"tol_verify overridden by {TOL_ENV_VAR}={override}")
        return cls(
            tol_rank=args.tol_rank,
            tol_psd=args.tol_psd,
            tol_verify=tol_verify,
            alpha_spec=args.alpha,
            output=args.output,
            seed=args.seed,
            validate=not args.no_validate,
        )

    def weights(self, dim: int, fallback: Optional[WeightSequence] = None) -> WeightSequence:
        """
        Weight sequence for dimension dim

        "dyadic" defers to weights stored with the input (fallback) when
        present; "geometric:B" and explicit comma lists always apply.
        """
        spec = self.alpha_spec.strip()
        if spec == "dyadic":
            return fallback if fallback is not None else WeightSequence.dyadic(dim)
        if spec.startswith("geometric:"):
            try:
                base = float(spec.split(':', 1)[1])
            except ValueError:
                raise InputError(f"Cannot parse geometric base in '{spec}'") from None
            return WeightSequence.geometric(dim, base)
        try:
            values = np.array([float(item) for item in spec.split(',') if item.strip()])
        except ValueError:
            raise InputError(f"alpha must be 'dyadic', 'geometric:B' or a comma list, got '{spec}'") from None
        alpha = WeightSequence(values)
        if values.size < dim:
            raise InputError(f"alpha lists {values.size} weights, dimension {dim} needs {dim}")
        return alpha

    def options(self) -> Dict[str, Any]:
        """Options dict for PipelineEngine"""
        return {
            'tol_rank': self.tol_rank,
            'tol_psd': self.tol_psd,
            'tol_verify': self.tol_verify,
            'validate': self.validate,
        }

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
