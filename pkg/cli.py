"""
Command-line front end

    python cli.py factorize --preset einstein_rosen --k 1 --a 1 --b 1.359140914 --grid 0.1:5:50,-3:3:50
    python cli.py verify --preset pulse --refine
    python cli.py deform --preset kasner --N 4 --a 1.1125 --omega a --mult 2 --contour tau-a-inside
    python cli.py compose er_k1.json er_k2.json --out er_sum.json

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 precondition violation. Errors are written to stderr as JSON.
"""
import argparse
import json
import sys
from typing import List, Optional

from solutions.pipeline import (
    RunConfig,
    dumps,
    example,
    render_example,
    render_summary,
    run_compose,
    run_current,
    run_deform,
    run_factorize,
    run_invert,
    run_metric,
    run_verify,
    write_output,
)
from utils.errors import ConfigurationError, VerificationFailure, WHGravError
from utils.logger import setup_logger

logger = setup_logger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument errors become configuration errors instead of SystemExit"""

    def error(self, message):
        raise ConfigurationError(message, {'usage': self.format_usage().strip()})


def _common(parser: argparse.ArgumentParser, monodromy: bool = True) -> None:
    parser.add_argument('--config', help='JSON or YAML run configuration (flags override it)')
    parser.add_argument('--contour', help="Contour name ('circle', 'tau-a-inside', ...), JSON text or file")
    parser.add_argument('--grid', help="Grid 'rmin:rmax:n,vmin:vmax:n'")
    parser.add_argument('--nodes', type=int, help='Quadrature nodes on the contour')
    parser.add_argument('--tol', type=float, help='Tolerance for the residual checks')
    parser.add_argument('--out', help='Output file')
    if not monodromy:
        return
    parser.add_argument('--preset', help='Built-in monodromy: einstein_rosen, kasner, pulse, constant')
    parser.add_argument('--monodromy', help='Monodromy document (JSON/YAML text or file)')
    parser.add_argument('--backend', choices=['quadrature', 'rational', 'partial_fraction'])
    parser.add_argument('--k', type=float, help='Einstein-Rosen wave number')
    parser.add_argument('--a', type=float, help='Preset parameter a')
    parser.add_argument('--b', type=float, help='Preset amplitude b')
    parser.add_argument('--N', type=int, help='Kasner power')
    parser.add_argument('--c', type=float, help='Constant monodromy value')
    parser.add_argument('--lambda', dest='lam', type=int, choices=[-1, 1], help='Signature sign')
    parser.add_argument('--omega', help="Deformation parameter (complex, or 'a')")
    parser.add_argument('--mult', type=int, help='Deformation multiplicity')
    parser.add_argument('--channel', type=int, help='Deformed channel (the other one gets -mult)')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='whgrav', description='Wiener-Hopf solutions of the reduced Einstein equations')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True

    factorize = commands.add_parser('factorize', help='Canonical factorization on a grid')
    _common(factorize)

    verify = commands.add_parser('verify', help='Residual checks; exit 1 on failure')
    _common(verify)
    verify.add_argument('--solution', help='Check exported M values instead of a monodromy')
    verify.add_argument('--omegas', nargs='+', help='Lax-pair spectral parameters')
    verify.add_argument('--refine', action='store_true', help='Repeat at half spacing and report ratios')

    deform = commands.add_parser('deform', help='Meromorphic deformation of a family')
    _common(deform)

    for name, count in (('compose', 2), ('invert', 1)):
        sub = commands.add_parser(name, help=f'{name.capitalize()} solution files')
        sub.add_argument('inputs', nargs=count, help='Solution JSON files')
        _common(sub, monodromy=False)

    metric = commands.add_parser('metric', help='CSV of rho, v, Delta, B, psi')
    _common(metric)
    metric.add_argument('--line-element', dest='line_element', action='store_true',
                        help='Add the Kasner line-element descriptor')
    metric.add_argument('--sigma', type=int, choices=[-1, 1])
    metric.add_argument('--epsilon', type=int, choices=[-1, 1])

    current = commands.add_parser('current', help='Conserved current at a spectral parameter')
    _common(current)
    current.add_argument('--current-omega', dest='current_omega', help='Spectral parameter of the current')

    walk = commands.add_parser('example', help='Kasner walk-through on both deformed contours')
    walk.add_argument('--N', type=int, default=4)
    walk.add_argument('--n', type=int, default=2)
    walk.add_argument('--nodes', type=int)
    walk.add_argument('--out')
    return parser


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        write_output(text, path)
    else:
        sys.stdout.write(text if text.endswith('\n') else text + '\n')


def _solution_command(config: RunConfig, runner) -> int:
    document = runner(config)
    if config.out:
        write_output(dumps(document), config.out)
        sys.stdout.write(render_summary(config.command, document, config.out))
    else:
        _emit(dumps(document), None)
    return 0


def _dispatch(args) -> int:
    if args.command == 'example':
        document = example(args.N, args.n, args.nodes)
        if args.out:
            write_output(dumps(document), args.out)
        sys.stdout.write(render_example(document))
        return 0

    config = RunConfig.from_args(args).validate()
    logger.info(f"Running {config.command} with {config.to_dict()}")

    if config.command in ('factorize', 'deform', 'compose', 'invert'):
        runner = {'factorize': run_factorize, 'deform': run_deform,
                  'compose': run_compose, 'invert': run_invert}[config.command]
        return _solution_command(config, runner)

    if config.command == 'verify':
        report = run_verify(config)
        _emit(dumps(report.to_dict()), config.out)
        if config.out:
            sys.stdout.write(report.render())
        if not report.passed:
            failure = VerificationFailure("verification failed", {'failed_checks': report.failed_checks()})
            sys.stderr.write(json.dumps(failure.to_dict()) + '\n')
            return failure.exit_code
        return 0

    if config.command == 'metric':
        data, summary = run_metric(config)
        _emit(data.to_csv(), config.out)
        if config.out:
            sys.stdout.write(dumps(summary) + '\n')
        return 0

    document = run_current(config)
    _emit(dumps(document), config.out)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except WHGravError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        sys.stderr.write(json.dumps(e.to_dict()) + '\n')
        return e.exit_code
    except OSError as e:
        error = ConfigurationError(f"cannot access {e.filename or 'file'}: {e.strerror or e}")
        sys.stderr.write(json.dumps(error.to_dict()) + '\n')
        return error.exit_code


if __name__ == '__main__':
    sys.exit(main())
