"""
Newton-polyhedron restriction toolkit

Commands:
    parse      canonical form of a polynomial
    newton     Newton polyhedron, distance and principal face
    height     best Newton distance over rotations
    exponents  p*, q*, beta and the Knapp lower bound from the height
    decay      decay fit of the surface-measure Fourier transform
    knapp      Knapp scan at one exponent p
    verify     full pipeline (LangGraph) with one pass/fail report

Exit codes: 0 success (a failed verification still exits 0), 1 operational
failure, 2 polynomial syntax error, 3 degenerate input, 4 quadrature budget
or convergence failure.
"""

import sys
import logging
import argparse
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional

from adapt import critical_p, height_search
from config_loader import RunConfig, load_config
from langgraph_workflow import create_initial_verify_state, create_verify_graph
from newton import EmptySupportError, build_polyhedron, distance, support
from oscint import (
    DECAY_CSV_COLUMNS,
    ConvergenceError,
    QuadratureBudgetError,
    SurfacePatch,
    decay_fit,
)
from polyalg import PolynomialSyntaxError, compose_linear, parse
from restrict import KNAPP_CSV_COLUMNS, geometric_scales, knapp_family, knapp_scan
from tool import dumps, envelope, parse_rational, write_csv, write_json

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SYNTAX = 2
EXIT_DEGENERATE = 3
EXIT_NUMERICAL = 4

EXIT_CODES_BY_TYPE = {
    'PolynomialSyntaxError': EXIT_SYNTAX,
    'EmptySupportError': EXIT_DEGENERATE,
    'QuadratureBudgetError': EXIT_NUMERICAL,
    'ConvergenceError': EXIT_NUMERICAL,
}


def exit_code_for(exc: BaseException) -> int:
    """Exit code of an exception, by type name so workflow error records map the same way"""
    return EXIT_CODES_BY_TYPE.get(type(exc).__name__, EXIT_FAILURE)


# Verify nodes in pipeline order; the earliest failure decides the exit code
NODE_ORDER = ('newton', 'height', 'decay', 'knapp', 'aggregate', 'save')


def order_errors(errors: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Workflow error records by pipeline position, then message"""
    def position(record):
        node = record.get('node')
        rank = NODE_ORDER.index(node) if node in NODE_ORDER else len(NODE_ORDER)
        return rank, str(record.get('error', ''))
    return sorted(errors, key=position)


def verify_exit_code(errors: List[Dict[str, Any]]) -> int:
    if not errors:
        return EXIT_OK
    return EXIT_CODES_BY_TYPE.get(order_errors(errors)[0].get('type'), EXIT_FAILURE)


def setup_logging(config):
    """Setup logging configuration"""
    log_dir = Path(config.log_file).parent
    log_dir.mkdir(parents=True, exist_ok=True)

    handlers = []

    # File handler
    handlers.append(logging.FileHandler(config.log_file, encoding='utf-8'))

    # Console handler (stderr, so --json output on stdout stays clean)
    if config.log_console:
        handlers.append(logging.StreamHandler())

    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format=config.log_format,
        handlers=handlers
    )

    return logging.getLogger(__name__)


# ============================================================================
# ARGUMENTS
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--poly', help='Polynomial in x1..x3, e.g. "x1^2+x2^2+x3^4"')
    common.add_argument('--out', help='Output directory (default: workflow.output_dir)')
    common.add_argument('--seed', type=int, help='Seed for every randomized step')
    common.add_argument('--json', action='store_true', help='Print the JSON result to stdout')
    common.add_argument('--bump-radius', type=float, help='Radius r of the cutoff psi')
    common.add_argument('--budget', type=int, help='Largest number of integrand evaluations per grid')
    common.add_argument('--workers', type=int, help='Thread pool size (results do not depend on it)')
    common.add_argument('--config', default=None, help='Path to config file (default: $NEWTONPOLY_CONFIG or config.json)')

    height = argparse.ArgumentParser(add_help=False)
    height.add_argument('--starts', type=int, help='Random starting rotations of the height search')
    height.add_argument('--iters', type=int, help='Refinement rounds per start')
    height.add_argument('--h-override', help='Use this height (rational) instead of the search result')

    decay = argparse.ArgumentParser(add_help=False)
    decay.add_argument('--xi-min', type=float, help='Smallest |xi|')
    decay.add_argument('--xi-max', type=float, help='Largest |xi| (>= 32 xi-min)')
    decay.add_argument('--mags', type=int, help='Magnitudes on the geometric grid (>= 8)')
    decay.add_argument('--dirs', type=int, help='Directions, the normal included')

    knapp = argparse.ArgumentParser(add_help=False)
    knapp.add_argument('--p', help='Exponent p in (1, 2], rational (default: p*)')
    knapp.add_argument('--delta-min', type=float, help='Smallest scale delta')
    knapp.add_argument('--delta-max', type=float, help='Largest scale delta')
    knapp.add_argument('--scales', type=int, help='Number of geometric scales (>= 6)')

    parser = argparse.ArgumentParser(
        description='Newton polyhedra, heights and restriction exponents of x4 = phi(x1, x2, x3)'
    )
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('parse', parents=[common], help='Canonical form of the polynomial')
    sub.add_parser('newton', parents=[common], help='Newton polyhedron and distance')
    sub.add_parser('height', parents=[common, height], help='Height search over rotations')
    sub.add_parser('exponents', parents=[common, height], help='Critical restriction exponents')
    sub.add_parser('decay', parents=[common, height, decay], help='Decay fit of the Fourier transform')
    sub.add_parser('knapp', parents=[common, height, knapp], help='Knapp scan at one p')
    sub.add_parser('verify', parents=[common, height, decay, knapp], help='Full verification pipeline')
    return parser


def resolve_run_config(config, args: argparse.Namespace) -> RunConfig:
    """Config file values overridden by the flags that were given"""
    flag = lambda name: getattr(args, name, None)
    return RunConfig.from_config(
        config,
        poly=flag('poly'),
        seed=flag('seed'),
        bump_radius=flag('bump_radius'),
        budget=flag('budget'),
        workers=flag('workers'),
        output_dir=flag('out'),
        starts=flag('starts'),
        iters=flag('iters'),
        h_override=flag('h_override'),
        xi_min=flag('xi_min'),
        xi_max=flag('xi_max'),
        n_mags=flag('mags'),
        n_dirs=flag('dirs'),
        p=flag('p'),
        delta_min=flag('delta_min'),
        delta_max=flag('delta_max'),
        n_scales=flag('scales'),
    )


# ============================================================================
# SHARED STEPS
# ============================================================================

def emit(command: str, run: RunConfig, result: Any, args: argparse.Namespace,
         name: Optional[str] = None) -> Path:
    """Write <out>/<name>.json with the config echo; print it with --json"""
    payload = envelope(command, run.to_dict(), result)
    path = write_json(Path(run.output_dir) / f"{name or command}.json", payload)
    if args.json:
        sys.stdout.write(dumps(payload))
    return path


def run_height(phi, run: RunConfig):
    """Height search plus exponents (with the optional override)"""
    height = height_search(phi, starts=run.starts, iters=run.iters, seed=run.seed,
                           prune_tol=run.height_prune_tol, workers=run.workers)
    h = parse_rational(run.h_override) if run.h_override else height.h
    exponents = critical_p(h, d=height.d_original)
    return height, exponents


def surface_patch(phi, run: RunConfig) -> SurfacePatch:
    return SurfacePatch(phi=phi, bump_radius=run.bump_radius, bump_kind=run.bump_kind,
                        bump_power=run.bump_power, include_area_factor=run.include_area_factor)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_parse(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    emit('parse', run, {'canonical': str(phi), 'polynomial': phi.to_dict()}, args)
    print(f"[OK] {phi}", file=sys.stderr if args.json else sys.stdout)
    return EXIT_OK


def cmd_newton(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    polyhedron = build_polyhedron(support(phi))
    result = distance(polyhedron)
    emit('newton', run, {'polyhedron': polyhedron.to_dict(), **result.to_dict()}, args)
    if not args.json:
        print(f"[OK] Newton distance d = {result.d}")
        print(f"[INFO] Principal face dimension {result.principal_face_dim}, "
              f"vertices {[list(v) for v in result.principal_face_vertices]}")
    return EXIT_OK


def cmd_height(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    height = height_search(phi, starts=run.starts, iters=run.iters, seed=run.seed,
                           prune_tol=run.height_prune_tol, workers=run.workers)
    emit('height', run, height, args)
    if not args.json:
        print(f"[OK] h = {height.h} (d in the given coordinates = {height.d_original})")
        if not height.certified:
            print("[WARN] Principal face is not a single compact facet; h is a lower bound")
    return EXIT_OK


def cmd_exponents(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    height, exponents = run_height(phi, run)
    result = exponents.to_dict()
    result['certified'] = height.certified
    emit('exponents', run, result, args)
    if not args.json:
        print(f"[OK] h = {exponents.h}, p* = {exponents.p_star}, q* = {exponents.q_star}, "
              f"beta = {exponents.beta}")
    return EXIT_OK


def cmd_decay(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    _, exponents = run_height(phi, run)
    out = Path(run.output_dir)
    try:
        fit = decay_fit(surface_patch(phi, run), run.xi_min, run.xi_max, run.n_mags, run.n_dirs,
                        seed=run.seed, nodes_per_wavelength=run.nodes_per_wavelength,
                        max_tilt=run.max_tilt, budget=run.budget, rel_tol=run.quadrature_rel_tol,
                        workers=run.workers)
    except (QuadratureBudgetError, ConvergenceError) as e:
        logger.error(f"Decay fit aborted: {e}")
        write_csv(out / "decay_samples.csv", DECAY_CSV_COLUMNS, [s.to_row() for s in e.partial])
        emit('decay', run, {'partial': True, 'error': str(e), 'n_samples': len(e.partial)}, args,
             name='decay_summary')
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    write_csv(out / "decay_samples.csv", DECAY_CSV_COLUMNS, fit.rows())
    summary = fit.summary(exponents.h, slack=run.conformance_slack)
    summary['partial'] = False
    emit('decay', run, summary, args, name='decay_summary')
    if not args.json:
        print(f"[OK] Fitted exponent {fit.fitted_exponent:.4f} +- {fit.fit_stderr:.4f} "
              f"(1/h = {float(1 / exponents.h):.4f})")
        print(f"[{'OK' if summary['conforms'] else 'WARN'}] Decay conformance: {summary['conforms']}")
    return EXIT_OK


def cmd_knapp(run: RunConfig, args, logger) -> int:
    phi = parse(run.poly, nvars=run.nvars)
    height, exponents = run_height(phi, run)
    p = parse_rational(run.p) if run.p else exponents.p_star
    adapted = compose_linear(phi, height.maximizer, prune_tol=run.height_prune_tol)
    patch = surface_patch(adapted, run)
    scales = geometric_scales(run.delta_min, run.delta_max, run.n_scales)
    family = knapp_family(height.distance, scales=scales, c=run.cap_constant, phi=adapted)
    report = knapp_scan(patch, family, p, p_star=exponents.p_star, workers=run.workers,
                        threshold=run.verdict_threshold)

    stem = f"knapp_p{str(p).replace('/', '-')}"
    write_csv(Path(run.output_dir) / f"{stem}.csv", KNAPP_CSV_COLUMNS, report.rows())
    emit('knapp', run, {'family': family.to_dict(), **report.to_dict()}, args, name=stem)
    if not args.json:
        print(f"[OK] p = {p}: fitted slope {report.fitted_slope:.4f}, "
              f"predicted {float(report.predicted_slope):.4f} -> {report.verdict}")
    return EXIT_OK


def cmd_verify(run: RunConfig, args, logger) -> int:
    graph = create_verify_graph()
    state = create_initial_verify_state(run.poly, asdict(run))
    print("[INFO] Executing verify workflow...", file=sys.stderr if args.json else sys.stdout)
    result = graph.invoke(state)

    report = result.get('report')
    if report is not None and args.json:
        sys.stdout.write(report.to_json())
    elif report is not None:
        print(f"\n{'='*80}")
        print("VERIFY RESULTS")
        print(f"{'='*80}")
        e = report.exponents
        print(f"  d = {e.get('d')}, h = {e.get('h')}, p* = {e.get('p_star')}")
        print(f"  Decay conforms: {report.decay_conforms}")
        print(f"  Knapp verdicts: {[k.get('verdict') for k in report.knapp]}")
        for warning in report.warnings:
            print(f"[WARN] {warning}")
        print(f"[{'PASS' if report.passed else 'FAIL'}] pass = {report.passed}")
        for path in result.get('output_files', []):
            print(f"[OK] Saved {path}")

    errors = order_errors(result.get('errors', []))
    for error in errors:
        print(f"[ERROR] [{error.get('node', 'unknown')}] {error.get('error', 'Unknown error')}", file=sys.stderr)
    return verify_exit_code(errors)


COMMANDS = {
    'parse': cmd_parse,
    'newton': cmd_newton,
    'height': cmd_height,
    'exponents': cmd_exponents,
    'decay': cmd_decay,
    'knapp': cmd_knapp,
    'verify': cmd_verify,
}


def main(argv=None) -> int:
    """Main entry point with argument parsing"""
    args = build_parser().parse_args(argv)

    # Load configuration
    try:
        config = load_config(args.config)
    except FileNotFoundError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_FAILURE

    # Setup logging
    logger = setup_logging(config)
    logger.info("=" * 80)
    logger.info(f"COMMAND {args.command.upper()} STARTED")
    logger.info("=" * 80)

    try:
        run = resolve_run_config(config, args)
        code = COMMANDS[args.command](run, args, logger)
    except PolynomialSyntaxError as e:
        logger.error(f"Syntax error: {e}")
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_SYNTAX
    except EmptySupportError as e:
        logger.error(f"Degenerate input: {e}")
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (QuadratureBudgetError, ConvergenceError) as e:
        logger.error(f"Numerical failure: {e}")
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        print(f"[ERROR] {e}", file=sys.stderr)
        return exit_code_for(e)

    logger.info(f"Command {args.command} completed with exit code {code}")
    return code


if __name__ == "__main__":
    try:
        exit_code = main()
        sys.exit(exit_code)
    except KeyboardInterrupt:
        print("\n\n[INFO] Interrupted by user")
        sys.exit(1)
