"""
State Schema Definitions for the verify workflow

The decay and knapp nodes run in parallel after the height search. They
write disjoint result keys; the shared warnings and errors lists use
Annotated reducers so their concurrent updates are concatenated.
"""

import operator
from typing import TypedDict, Dict, List, Optional, Any, Annotated


# ============================================================================
# VERIFY STATE
# ============================================================================

class VerifyState(TypedDict, total=False):
    """
    Global state of the verify graph

    Result objects (Polynomial, DistanceResult, HeightResult, ...) are kept
    as live objects; only the save node serializes them.
    """
    # Input configuration (full RunConfig fields, workers and output_dir included)
    poly_text: str
    config: Dict[str, Any]

    # newton node
    phi: Any
    polyhedron: Optional[Dict[str, Any]]
    distance: Any
    checks: Dict[str, Any]

    # height node
    height: Any
    exponents: Any

    # decay node (parallel)
    decay_fit: Any
    decay_summary: Dict[str, Any]

    # knapp node (parallel)
    knapp_reports: List[Any]

    # aggregate node
    report: Any

    # save node
    output_files: List[str]

    # Workflow status
    status: str  # 'running', 'completed', 'failed'
    current_phase: str  # 'newton', 'height', 'sampling', 'aggregating', 'saving'

    # Concurrent updates from decay and knapp
    warnings: Annotated[List[str], operator.add]
    errors: Annotated[List[Dict[str, Any]], operator.add]


# ============================================================================
# INITIAL STATE FACTORY
# ============================================================================

def create_initial_verify_state(poly_text: str, config: Dict[str, Any]) -> VerifyState:
    """
    Create initial verify state with default values.

    Args:
        poly_text: Polynomial in the parse grammar
        config: RunConfig fields as a dictionary

    Returns:
        Initialized VerifyState
    """
    return VerifyState(
        poly_text=poly_text,
        config=config,
        phi=None,
        polyhedron=None,
        distance=None,
        checks={},
        height=None,
        exponents=None,
        decay_fit=None,
        decay_summary={},
        knapp_reports=[],
        report=None,
        output_files=[],
        status='running',
        current_phase='newton',
        warnings=[],
        errors=[],
    )
