"""
Command line - argparse subcommands dispatching to the core pipelines
Every command returns a report body and a pass flag; run() maps outcomes to
exit codes 0 (all checks pass), 1 (check failed or inconsistency) and
2 (bad input, contract or precondition)
"""

import argparse
import logging
from dataclasses import replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cli.config import RunConfig
from cli.report import ReportLogHandler, emit_report
from core.check_report import CheckReport
from core.counterexample import (GrowthSequence, build, eigencheck_e,
                                 spectrum_sweep, square_sum_identity,
                                 verify_properties)
from core.eigen import (EXPANSION_TOL, SHIFT_RESIDUAL_TOL, OperatorMatrix,
                        eigenpair_check, haar_recovery, shift_eigensolve,
                        spectral_expand)
from core.errors import (ConsistencyError, ContractViolation, InputError,
                         PreconditionError)
from core.form_models import DiscretePSFM, WeightSequence
from core.forms import is_positive
from core.matrix_io import load_psfm, read_matrix
from core.pipeline import PipelineEngine, PipelineResult
from core.pointwise import PointwiseDecomposition
from core.psfm import is_semispectral, validate
from core.random_models import (make_rng, random_normal, random_pom,
                                random_psfm, random_shift_weights,
                                random_spectral)
from core.shifts import (ShiftClass, ShiftWeights, arc_form, classify,
                         moment_form, moment_form_defect, principal_minor,
                         moment_matrix)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

CommandResult = Tuple[Dict[str, Any], bool]


def parse_psfm(path: str, config: RunConfig) -> Tuple[DiscretePSFM, WeightSequence]:
    """Load a PSFM file; positivity is enforced here unless validation is off"""
    E, file_alpha = load_psfm(path)
    if config.validate:
        validate(E, config.tol_psd)
    return E, config.weights(E.dim, file_alpha)


def _int_list(text: str, name: str) -> List[int]:
    values = []
    for position, item in enumerate(item for item in text.split(',') if item.strip()):
        try:
            values.append(int(item))
        except ValueError:
            raise InputError(f"{name} must be integers, got '{item.strip()}'", position=position) from None
    if not values:
        raise InputError(f"{name} is empty")
    return values


def _complex(text: str, name: str) -> complex:
    try:
        return complex(text.replace(' ', ''))
    except ValueError:
        raise InputError(f"{name} must be a complex number like 0.5+1j, got '{text}'") from None


def _engine(E: DiscretePSFM, alpha: WeightSequence, config: RunConfig) -> PipelineEngine:
    engine = PipelineEngine(E, alpha, config.options())
    engine.on_progress = lambda stage, percent, message: logger.debug(f"[{percent:3.0f}%] {stage}: {message}")
    return engine


def decomposition_json(P: PointwiseDecomposition) -> List[Dict[str, Any]]:
    return [
        {'label': atom.label, 'n': atom.rank, 'mu': atom.mu, 'd_rows': atom.d_rows}
        for atom in P.atoms
    ]


def _reports_body(result: PipelineResult) -> Dict[str, Any]:
    return {report.name: report for report in result.reports}


# ---------------------------------------------------------------- PSFM files

def cmd_dilate(args, config: RunConfig) -> CommandResult:
    E, alpha = parse_psfm(args.file, config)
    result = _engine(E, alpha, config).run(('validate', 'dilate', 'verify'))
    report = result.reports[0]
    body = {
        'kdim': result.dilation.kdim,
        'checks': report.checks,
        'max_defects': report.max_defects,
        'details': report.details,
        'provenance': [list(item) for item in result.dilation.basis_provenance],
        'summary': E.get_summary(),
    }
    return body, report.passed


def cmd_diagonalize(args, config: RunConfig) -> CommandResult:
    E, alpha = parse_psfm(args.file, config)
    result = _engine(E, alpha, config).run(('validate', 'decompose', 'direct_integral', 'traceclass'))
    body = {
        'atoms': decomposition_json(result.decomposition),
        'block_dims': list(result.model.block_dims),
        'kdim': result.model.kdim,
        'reports': _reports_body(result),
    }
    return body, result.passed


def cmd_verify(args, config: RunConfig) -> CommandResult:
    E, alpha = parse_psfm(args.file, config)
    result = _engine(E, alpha, config).run()
    body = {
        'kdim': result.dilation.kdim,
        'ranks': result.decomposition.ranks,
        'spectral': result.spectral,
        'reports': _reports_body(result),
    }
    return body, result.passed


def cmd_spectral_detect(args, config: RunConfig) -> CommandResult:
    E, alpha = parse_psfm(args.file, config)
    if not is_semispectral(E, config.tol_verify):
        raise PreconditionError("Spectral detection needs a normalized POM (E_Omega = I)")
    result = _engine(E, alpha, config).run(('validate', 'dilate', 'decompose', 'detect'))
    body = {'spectral': result.spectral, 'kdim': result.dilation.kdim, 'dim': E.dim,
            'reports': _reports_body(result)}
    return body, result.passed


# ---------------------------------------------------------------- shifts

def cmd_shift_classify(args, config: RunConfig) -> CommandResult:
    w = ShiftWeights.parse(args.weights, args.window)
    verdict = classify(w)
    return {'classification': verdict, 'window': w.window, 'weights': w.c}, True


def cmd_shift_minor(args, config: RunConfig) -> CommandResult:
    w = ShiftWeights.parse(args.weights, args.window)
    indices = _int_list(args.indices, "indices")
    det, formula = principal_minor(moment_matrix(w), indices)
    report = CheckReport('principal_minor')
    report.record('product_formula', abs(det - formula) / max(1.0, abs(formula)), 1e-12)
    body = {'indices': indices, 'determinant': det, 'formula': formula, 'report': report}
    return body, report.passed


def cmd_shift_arc(args, config: RunConfig) -> CommandResult:
    w = ShiftWeights.parse(args.weights, args.window)
    form = arc_form(w, (args.t0, args.t1))
    verdict = classify(w)
    positivity = is_positive(form, config.tol_psd)
    report = CheckReport('arc_form')
    if verdict != ShiftClass.NOT_POSITIVE:
        report.flag('positive', positivity.positive)
    body = {
        'arc': [args.t0, args.t1],
        'classification': verdict,
        'form': form.entries,
        'min_eigenvalue': positivity.min_eigenvalue,
        'report': report,
    }
    return body, report.passed


def cmd_shift_moment(args, config: RunConfig) -> CommandResult:
    w = ShiftWeights.parse(args.weights, args.window)
    form = moment_form(w, args.k)
    report = CheckReport('moment_form')
    report.record('shift_power', moment_form_defect(w, args.k), config.tol_verify)
    return {'k': args.k, 'form': form.entries, 'report': report}, report.passed


def cmd_shift_eigen(args, config: RunConfig) -> CommandResult:
    lam = _complex(args.eigenvalue, "--lambda")
    solution = shift_eigensolve(lam, args.window)
    if solution is None:
        return {'eigenvalue': lam, 'solution': None,
                'reason': "lambda = 0 admits only the zero sequence"}, True
    body = {
        'eigenvalue': lam,
        'window': args.window,
        'coefficients': solution.coefficients,
        'residual': solution.residual,
        'adjoint_residual': solution.adjoint_residual,
        'simultaneous': solution.simultaneous,
    }
    return body, solution.residual <= SHIFT_RESIDUAL_TOL


def cmd_haar(args, config: RunConfig) -> CommandResult:
    report = haar_recovery(args.window, args.grid)
    return {'report': report}, report.passed


# ---------------------------------------------------------------- normal matrices

def cmd_normal_expand(args, config: RunConfig) -> CommandResult:
    T = OperatorMatrix(read_matrix(args.file))
    system = spectral_expand(T, config.weights(T.size), EXPANSION_TOL, config.tol_rank, config.tol_psd)
    pairs = eigenpair_check(T)
    body = {
        'points': system.points,
        'multiplicities': list(system.multiplicities),
        'weights': system.weights,
        'd_rows': list(system.d_rows),
        'reports': {'spectral_expand': system.report, 'eigenpairs': pairs},
    }
    return body, system.report.passed and pairs.passed


# ---------------------------------------------------------------- counterexample

def cmd_cex_build(args, config: RunConfig) -> CommandResult:
    M = build(GrowthSequence.parse(args.a), args.size)
    properties = verify_properties(M)
    identity = square_sum_identity(M)
    body = {
        'growth': M.growth.describe(),
        'size': M.size,
        'nnz': int(M.csr.nnz),
        'bound': M.growth.bound,
        'partial_square_sum': M.square_sum(),
        'complete_rows': list(M.complete_rows),
        'b_values': [str(b) for b in M.b_values],
        'reports': {'properties': properties, 'square_sum_identity': identity},
    }
    return body, properties.passed and identity.passed


def cmd_cex_spectrum(args, config: RunConfig) -> CommandResult:
    sizes = _int_list(args.sizes, "sizes")
    M = build(GrowthSequence.parse(args.a), max(sizes))
    report = spectrum_sweep(M, sizes)
    body = {
        'growth': M.growth.describe(),
        'bound': report.details['bound'],
        'max_abs_eig': report.details['max_abs_eig'],
        'partial_square_sum': report.details['partial_square_sum'],
        'report': report,
    }
    return body, report.passed


def cmd_cex_eigencheck(args, config: RunConfig) -> CommandResult:
    M = build(GrowthSequence.parse(args.a), args.size)
    report = eigencheck_e(M)
    body = {
        'growth': M.growth.describe(),
        'size': M.size,
        'complete_rows_checked': report.details['complete_rows_checked'],
        'report': report,
    }
    return body, report.passed


# ---------------------------------------------------------------- randomized suite

def cmd_suite(args, config: RunConfig) -> CommandResult:
    """Seeded randomized acceptance suite"""
    rng = make_rng(config.seed)
    suite = CheckReport('suite')
    options = config.options()

    for case in range(args.cases):
        dim = int(rng.integers(1, 7))
        atoms = int(rng.integers(1, 9))
        E = random_psfm(rng, dim, atoms, null_atoms=int(rng.integers(0, 2)) if atoms > 1 else 0)
        engine = PipelineEngine(E, WeightSequence.dyadic(dim), options)
        result = engine.run(('dilate', 'verify', 'decompose', 'direct_integral', 'traceclass'))
        for report in result.reports:
            suite.merge(report, prefix=f"{report.name}.")

        spectral = PipelineEngine(random_spectral(rng, dim), None, options).run(('dilate', 'decompose', 'detect'))
        suite.flag('detect.spectral_inputs', spectral.spectral is True)
        if dim > 1:
            pom = PipelineEngine(random_pom(rng, dim, atoms + 1), None, options).run(('dilate', 'decompose', 'detect'))
            suite.flag('detect.semispectral_inputs', pom.spectral is False)

        matrix, _ = random_normal(rng, int(rng.integers(1, 9)), distinct=int(rng.integers(0, 4)))
        system = spectral_expand(OperatorMatrix(matrix), tol=EXPANSION_TOL)
        suite.merge(system.report, prefix="normal.")

        classify(random_shift_weights(rng, int(rng.integers(1, 6))))
        logger.debug(f"Suite case {case} done (N={dim}, M={atoms})")

    suite.details['cases'] = args.cases
    return {'seed': config.seed, 'cases': args.cases, 'report': suite}, suite.passed


# ---------------------------------------------------------------- parser

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--tol-rank', type=float, default=RunConfig.tol_rank)
    common.add_argument('--tol-psd', type=float, default=RunConfig.tol_psd)
    common.add_argument('--tol-verify', type=float, default=RunConfig.tol_verify)
    common.add_argument('--alpha', default=RunConfig.alpha_spec,
                        help="dyadic, geometric:B or an explicit comma list")
    common.add_argument('--output', default=None, help="report path (default stdout)")
    common.add_argument('--seed', type=int, default=RunConfig.seed)
    common.add_argument('--no-validate', action='store_true', help="skip positivity check at parse")
    common.add_argument('--log-file', default=None)
    common.add_argument('--verbose', action='store_true')
    return common


def _weights_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--weights', required=True, help='comma list mapped onto c_{-L}..c_{L-1}')
    parser.add_argument('--window', type=int, default=None, help='half-width L')


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog='psfm', description="Positive sesquilinear form measure toolkit")
    commands = parser.add_subparsers(dest='command', required=True)

    for name, handler, text in (
        ('dilate', cmd_dilate, "Naimark dilation of a PSFM file"),
        ('diagonalize', cmd_diagonalize, "pointwise decomposition and direct integral"),
        ('verify', cmd_verify, "every construction with its checks"),
        ('spectral-detect', cmd_spectral_detect, "spectral-measure detection for a POM"),
    ):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument('file')
        sub.set_defaults(handler=handler)

    shift = commands.add_parser('shift', help="weighted shifts on the circle")
    shift_commands = shift.add_subparsers(dest='shift_command', required=True)
    sub = shift_commands.add_parser('classify', parents=[common])
    _weights_flags(sub)
    sub.set_defaults(handler=cmd_shift_classify)
    sub = shift_commands.add_parser('minor', parents=[common])
    _weights_flags(sub)
    sub.add_argument('--indices', required=True, help="strictly increasing window indices")
    sub.set_defaults(handler=cmd_shift_minor)
    sub = shift_commands.add_parser('arc', parents=[common])
    _weights_flags(sub)
    sub.add_argument('--t0', type=float, default=0.0)
    sub.add_argument('--t1', type=float, default=2 * np.pi)
    sub.set_defaults(handler=cmd_shift_arc)
    sub = shift_commands.add_parser('moment', parents=[common])
    _weights_flags(sub)
    sub.add_argument('--k', type=int, default=1)
    sub.set_defaults(handler=cmd_shift_moment)

    normal = commands.add_parser('normal', help="finite normal matrices")
    normal_commands = normal.add_subparsers(dest='normal_command', required=True)
    sub = normal_commands.add_parser('expand', parents=[common])
    sub.add_argument('file')
    sub.set_defaults(handler=cmd_normal_expand)

    sub = commands.add_parser('shift-eigen', parents=[common], help="generalized eigenvectors of the shift")
    sub.add_argument('--lambda', dest='eigenvalue', required=True)
    sub.add_argument('--window', type=int, default=8)
    sub.set_defaults(handler=cmd_shift_eigen)

    sub = commands.add_parser('haar', parents=[common], help="Haar measure from circle-grid eigenvectors")
    sub.add_argument('--window', type=int, default=8)
    sub.add_argument('--grid', type=int, default=64)
    sub.set_defaults(handler=cmd_haar)

    cex = commands.add_parser('cex', help="generalized eigenvalue outside the spectrum")
    cex_commands = cex.add_subparsers(dest='cex_command', required=True)
    default_growth = GrowthSequence.default().describe()
    sub = cex_commands.add_parser('build', parents=[common])
    sub.add_argument('--a', default=default_growth)
    sub.add_argument('--size', type=int, default=25)
    sub.set_defaults(handler=cmd_cex_build)
    sub = cex_commands.add_parser('spectrum', parents=[common])
    sub.add_argument('--a', default=default_growth)
    sub.add_argument('--sizes', default="64,256,1024")
    sub.set_defaults(handler=cmd_cex_spectrum)
    sub = cex_commands.add_parser('eigencheck', parents=[common])
    sub.add_argument('--a', default=default_growth)
    sub.add_argument('--size', type=int, default=25)
    sub.set_defaults(handler=cmd_cex_eigencheck)

    sub = commands.add_parser('suite', parents=[common], help="seeded randomized acceptance suite")
    sub.add_argument('--cases', type=int, default=20)
    sub.set_defaults(handler=cmd_suite)
    return parser


def _command_name(args) -> str:
    parts = [args.command]
    for key in ('shift_command', 'normal_command', 'cex_command'):
        if getattr(args, key, None):
            parts.append(getattr(args, key))
    return " ".join(parts)


def _fail(error: Exception, code: int, args, config: Optional[RunConfig],
          collector: ReportLogHandler) -> int:
    logger.error(f"{type(error).__name__}: {error}")
    body = {
        'command': _command_name(args),
        'error': {
            'type': type(error).__name__,
            'message': str(error),
            'position': getattr(error, 'position', None),
        },
    }
    config = config or RunConfig()
    try:
        emit_report(body, config, False, collector.entries)
    except InputError:
        # the output path itself is the failure
        emit_report(body, replace(config, output=None), False, collector.entries)
    return code


def run(argv: Optional[Sequence[str]] = None,
        file_logging: Optional[Callable[[str], Any]] = None) -> int:
    """Parse argv, run the command, emit its report and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    root = logging.getLogger()
    if args.verbose:
        root.setLevel(logging.DEBUG)
    if args.log_file and file_logging:
        file_logging(args.log_file)

    collector = ReportLogHandler()
    root.addHandler(collector)
    config = None
    try:
        config = RunConfig.from_args(args)
        body, passed = args.handler(args, config)
        body = dict(body, command=_command_name(args))
        emit_report(body, config, passed, collector.entries)
        if not passed:
            logger.warning(f"{_command_name(args)}: checks failed")
        return EXIT_OK if passed else EXIT_FAILED
    except ConsistencyError as e:
        return _fail(e, EXIT_FAILED, args, config, collector)
    except (InputError, ContractViolation, PreconditionError) as e:
        return _fail(e, EXIT_INPUT, args, config, collector)
    finally:
        root.removeHandler(collector)
