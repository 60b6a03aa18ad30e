#%% Relevant packages

import argparse
import logging
import os
import sys
import time
from os.path import join
from typing import Any, Dict, List, Optional

#%% Custom packages

from .core.errors import (
    ConfigError, DomainCoverageError, DomainError, HypothesisError, InsufficientDataError, LabError,
    NotSmoothError, NumericalBlowupError,
)
from .core.utils import EXPERIMENTS, load_config, setup_logging
from .data_plots import write_summary
from .experiments import RUNNERS, ExperimentResult

logger = logging.getLogger(__name__)

#%% Exit codes

EXIT_OK = 0
EXIT_CRITERION = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3

_INPUT_ERRORS = (ConfigError, HypothesisError, DomainError, DomainCoverageError, InsufficientDataError,
                 FileNotFoundError)

#%% Arguments

def _parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog='rel-energy-lab',
        description='Numerical checks of localized relative energy estimates for the Euler equations.',
    )
    parser.add_argument('experiment', choices=EXPERIMENTS, help='experiment to run')
    parser.add_argument('--config', default=None, help='flat key = value configuration file')
    parser.add_argument('--out', default=None, help='output directory (overrides output.dir)')
    parser.add_argument('--threads', type=int, default=os.cpu_count() or 1, help='worker threads')
    parser.add_argument('--seed', type=int, default=None, help='random seed (overrides seed)')
    parser.add_argument('--plot', action='store_true', help='write PNG figures next to the reports')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    return parser.parse_args(argv)

#%% Summary

def _summary(experiment: str, config: Dict[str, Any], result: Optional[ExperimentResult], wall_time: float,
             exit_code: int, error: Optional[str] = None) -> Dict[str, Any]:
    summary = {
        'experiment': experiment,
        'parameters': config,
        'criteria': {name: c._asdict() for name, c in result.criteria.items()} if result else {},
        'informational': result.informational if result else {},
        'files': sorted(result.files) if result else [],
        'wall_time_s': wall_time,
        'exit_code': exit_code,
    }
    if error is not None:
        summary['error'] = error
    return summary


def _report(experiment: str, result: ExperimentResult) -> None:
    print(f"{experiment}: {'PASS' if result.passed else 'FAIL'}")
    if experiment == 'constant':
        print(f"  C_grid     = {result.informational['C_grid']:.10g}")
        c_analytic = result.informational['C_analytic']
        print(f"  C_analytic = {'unavailable' if c_analytic is None else format(c_analytic, '.10g')}")
    for name, c in result.criteria.items():
        print(f"  [{'ok' if c.passed else 'FAIL'}] {name}: {c.value!r} (limit {c.limit!r})")

#%% Entry point

def main(argv: Optional[List[str]] = None) -> int:
    '''
    Run one experiment and write its reports plus summary.json.

    Returns
    -------
    int
        0 all criteria pass, 1 a criterion failed or the reference run lost
        smoothness, 2 configuration or hypothesis error, 3 numerical blowup.
    '''
    args = _parse_args(argv)
    setup_logging(args.verbose)
    start = time.perf_counter()

    overrides: Dict[str, Any] = {'experiment': args.experiment}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.out is not None:
        overrides['output.dir'] = args.out
    if args.plot:
        overrides['output.plot'] = True

    try:
        config = load_config(args.config, overrides)
    except _INPUT_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = config['output.dir']
    os.makedirs(out_dir, exist_ok=True)
    result = None
    error = None
    try:
        result = RUNNERS[args.experiment](config, out_dir, max(1, args.threads))
        exit_code = EXIT_OK if result.passed else EXIT_CRITERION
    except NotSmoothError as err:
        error, exit_code = str(err), EXIT_CRITERION
    except NumericalBlowupError as err:
        error, exit_code = str(err), EXIT_BLOWUP
    except _INPUT_ERRORS as err:
        error, exit_code = str(err), EXIT_CONFIG
    except LabError as err:
        error, exit_code = str(err), EXIT_CONFIG

    if error is not None:
        print(f"error: {error}", file=sys.stderr)
    else:
        _report(args.experiment, result)

    wall_time = time.perf_counter() - start
    write_summary(_summary(args.experiment, config, result, wall_time, exit_code, error), join(out_dir, 'summary.json'))
    logger.info(f"{args.experiment} finished in {wall_time:.2f} s with exit code {exit_code}.")
    return exit_code


if __name__ == '__main__':
    raise SystemExit(main())
