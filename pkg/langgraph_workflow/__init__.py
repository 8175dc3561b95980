"""
LangGraph verify workflow

Chains the Newton polyhedron, height search, decay fit and Knapp scans of one
surface into a single VerifyReport.
"""

from .state import VerifyState, create_initial_verify_state
from .graphs import create_verify_graph

__all__ = [
    'VerifyState',
    'create_initial_verify_state',
    'create_verify_graph',
]
