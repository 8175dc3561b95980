"""
Node Implementations for the verify workflow

Nodes never raise: a failure becomes an error record
{"node", "error", "type", "timestamp"} and sets status to 'failed'.
"""

import logging
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Dict, Any, List

from adapt import critical_p, height_search
from config_loader import RunConfig
from newton import build_polyhedron, distance, support
from oscint import DECAY_CSV_COLUMNS, SurfacePatch, decay_fit
from polyalg import check_convex, check_finite_line_type, compose_linear, parse
from restrict import KNAPP_CSV_COLUMNS, KnappEvaluator, geometric_scales, knapp_family, knapp_scan
from tool import VerifyReport, parse_rational, write_csv, write_json

from .state import VerifyState

logger = logging.getLogger(__name__)

EXPECTED_BRACKET = ['bounded', 'critical', 'divergent']


def _error_record(node: str, exc: Exception) -> Dict[str, Any]:
    return {
        "node": node,
        "error": str(exc),
        "type": type(exc).__name__,
        "timestamp": datetime.now().isoformat()
    }


def _failed(state: VerifyState) -> bool:
    return state.get('status') == 'failed'


def _patch(phi, config: Dict[str, Any]) -> SurfacePatch:
    return SurfacePatch(
        phi=phi,
        bump_radius=config['bump_radius'],
        bump_kind=config['bump_kind'],
        bump_power=config['bump_power'],
        include_area_factor=config['include_area_factor'],
    )


# ============================================================================
# PIPELINE NODES
# ============================================================================

def newton_node(state: VerifyState) -> Dict[str, Any]:
    """
    Node: Parse the polynomial, build its Newton polyhedron and run the advisory checks

    Args:
        state: Current verify state

    Returns:
        Update with phi, polyhedron, distance and checks
    """
    logger.info("=== NEWTON NODE ===")
    logger.info(f"Polynomial: {state['poly_text']}")

    try:
        config = state['config']
        phi = parse(state['poly_text'], nvars=config['nvars'])
        polyhedron = build_polyhedron(support(phi))
        result = distance(polyhedron)
        logger.info(f"Newton distance d = {result.d}")

        warnings: List[str] = []
        convexity = check_convex(phi, radius=config['convexity_radius'], grid=config['convexity_grid'])
        if not convexity.convex:
            warnings.append(f"convexity check failed (min eigenvalue {convexity.min_eigenvalue:.3g})")
        line_type = check_finite_line_type(phi, directions=config['line_directions'], seed=config['seed'])
        if not line_type.finite:
            warnings.append("finite line type check failed")
        for warning in warnings:
            logger.warning(warning)

        return {
            "phi": phi,
            "polyhedron": polyhedron.to_dict(),
            "distance": result,
            "checks": {'convexity': convexity.to_dict(), 'line_type': line_type.to_dict()},
            "warnings": warnings,
            "current_phase": "height",
            "status": "running"
        }

    except Exception as e:
        logger.error(f"Newton node failed: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("newton", e)],
            "status": "failed",
            "current_phase": "error"
        }


def height_node(state: VerifyState) -> Dict[str, Any]:
    """
    Node: Height search and the exponents it determines

    An h_override in the config replaces the search result.
    """
    logger.info("=== HEIGHT NODE ===")

    try:
        config = state['config']
        phi = state['phi']
        height = height_search(
            phi,
            starts=config['starts'],
            iters=config['iters'],
            seed=config['seed'],
            prune_tol=config['height_prune_tol'],
            workers=config['workers'],
        )
        h = height.h
        warnings: List[str] = []
        if config.get('h_override'):
            h = parse_rational(config['h_override'])
            warnings.append(f"height overridden: {h} (search found {height.h})")
            logger.warning(warnings[-1])
        exponents = critical_p(h, d=state['distance'].d)
        logger.info(f"h = {h}, p* = {exponents.p_star}")

        return {
            "height": height,
            "exponents": exponents,
            "warnings": warnings,
            "current_phase": "sampling",
        }

    except Exception as e:
        logger.error(f"Height node failed: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("height", e)],
            "status": "failed",
            "current_phase": "error"
        }


def decay_node(state: VerifyState) -> Dict[str, Any]:
    """Node: Decay fit of the surface-measure transform against 1/h"""
    logger.info("=== DECAY NODE ===")

    try:
        config = state['config']
        h = state['exponents'].h
        fit = decay_fit(
            _patch(state['phi'], config),
            mag_min=config['xi_min'],
            mag_max=config['xi_max'],
            n_mags=config['n_mags'],
            n_dirs=config['n_dirs'],
            seed=config['seed'],
            nodes_per_wavelength=config['nodes_per_wavelength'],
            max_tilt=config['max_tilt'],
            budget=config['budget'],
            rel_tol=config['quadrature_rel_tol'],
            workers=config['workers'],
        )
        summary = fit.summary(h, slack=config['conformance_slack'])
        logger.info(f"Fitted exponent {fit.fitted_exponent:.4f} vs 1/h = {float(1 / h):.4f}; "
                    f"conforms: {summary['conforms']}")
        return {
            "decay_fit": fit,
            "decay_summary": summary,
            "warnings": list(fit.warnings),
        }

    except Exception as e:
        logger.error(f"Decay node failed: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("decay", e)],
        }


def knapp_node(state: VerifyState) -> Dict[str, Any]:
    """
    Node: Knapp scans at p* - offset, p*, p* + offset

    The family is built in the coordinates found by the height search, so the
    principal face used for the weights is the adapted one.
    """
    logger.info("=== KNAPP NODE ===")

    try:
        config = state['config']
        height = state['height']
        p_star = state['exponents'].p_star
        offset = parse_rational(config['p_offset'])
        adapted_phi = compose_linear(state['phi'], height.maximizer, prune_tol=config['height_prune_tol'])
        patch = _patch(adapted_phi, config)
        scales = geometric_scales(config['delta_min'], config['delta_max'], config['n_scales'])
        family = knapp_family(height.distance, scales=scales, c=config['cap_constant'], phi=adapted_phi)
        evaluator = KnappEvaluator(patch, family)

        reports = []
        for p in (p_star - offset, p_star, p_star + offset):
            reports.append(knapp_scan(patch, family, p, p_star=p_star, workers=config['workers'],
                                      threshold=config['verdict_threshold'], evaluator=evaluator))
        warnings = [w for report in reports for w in report.warnings]
        return {
            "knapp_reports": reports,
            "warnings": warnings,
        }

    except Exception as e:
        logger.error(f"Knapp node failed: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("knapp", e)],
        }


def aggregate_node(state: VerifyState) -> Dict[str, Any]:
    """
    Node: Combine exponents, decay and Knapp verdicts into one VerifyReport

    pass = decay conformance AND verdicts (bounded, critical, divergent).
    """
    logger.info("=== AGGREGATE NODE ===")

    try:
        config = state['config']
        exponents: Dict[str, Any] = {}
        if state.get('exponents') is not None:
            exponents = state['exponents'].to_dict()
            exponents['certified'] = state['height'].certified
        elif state.get('distance') is not None:
            exponents = {'d': state['distance'].d}

        decay_summary = state.get('decay_summary') or {}
        decay_conforms = bool(decay_summary.get('conforms', False))
        reports = state.get('knapp_reports') or []
        knapp = [r.to_dict() for r in reports]
        knapp_bracket = [r.verdict for r in reports] == EXPECTED_BRACKET
        passed = decay_conforms and knapp_bracket and not state.get('errors')

        errors = sorted(
            ({k: v for k, v in record.items() if k != 'timestamp'} for record in state.get('errors', [])),
            key=lambda record: (record['node'], record['error']),
        )
        report = VerifyReport(
            poly=str(state['phi']) if state.get('phi') is not None else state['poly_text'],
            exponents=exponents,
            decay=decay_summary,
            knapp=knapp,
            checks=state.get('checks', {}),
            passed=passed,
            decay_conforms=decay_conforms,
            knapp_bracket=knapp_bracket,
            warnings=sorted(state.get('warnings', [])),
            errors=errors,
            config=RunConfig(**config).to_dict(),
        )
        logger.info(f"Decay conforms: {decay_conforms}; Knapp bracket: {knapp_bracket}; pass: {passed}")
        return {
            "report": report,
            "current_phase": "saving"
        }

    except Exception as e:
        logger.error(f"Failed to aggregate results: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("aggregate", e)],
            "status": "failed"
        }


def save_node(state: VerifyState) -> Dict[str, Any]:
    """
    Node: Save the report (JSON + Markdown) and the sample tables

    Returns:
        Update with the written paths and the final status
    """
    logger.info("=== SAVE NODE ===")

    try:
        config = state['config']
        report = state.get('report')
        if report is None:
            logger.warning("No report to save")
            return {"status": "failed", "current_phase": "completed"}

        output_dir = Path(config.get('output_dir', 'output'))
        output_dir.mkdir(parents=True, exist_ok=True)
        files = []

        json_path = output_dir / "verify_report.json"
        report.save_to_file(str(json_path))
        md_path = output_dir / "verify_report.md"
        report.save_to_markdown(str(md_path))
        files += [str(json_path), str(md_path)]
        logger.info(f"Saved report: {json_path}")

        if state.get('decay_fit') is not None:
            files.append(str(write_csv(output_dir / "decay_samples.csv", DECAY_CSV_COLUMNS,
                                       state['decay_fit'].rows())))
        for scan in state.get('knapp_reports') or []:
            name = f"knapp_p{str(Fraction(scan.p)).replace('/', '-')}.csv"
            files.append(str(write_csv(output_dir / name, KNAPP_CSV_COLUMNS, scan.rows())))
        if state.get('polyhedron') is not None:
            files.append(str(write_json(output_dir / "polyhedron.json", {
                'schema_version': report.schema_version,
                'config': report.config,
                'result': state['polyhedron'],
            })))

        status = 'failed' if state.get('errors') else 'completed'
        return {
            "output_files": files,
            "status": status,
            "current_phase": "completed"
        }

    except Exception as e:
        logger.error(f"Failed to save results: {str(e)}", exc_info=True)
        return {
            "errors": [_error_record("save", e)],
            "status": "failed",
            "current_phase": "error"
        }


# ============================================================================
# ROUTERS
# ============================================================================

def after_newton_router(state: VerifyState) -> str:
    """Skip to the aggregate node when parsing or the polyhedron failed"""
    return "aggregate" if _failed(state) else "height"


def after_height_router(state: VerifyState):
    """Fan out to the decay and knapp nodes, or skip them after a failure"""
    return "aggregate" if _failed(state) else ["decay", "knapp"]
