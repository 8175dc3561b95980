"""
Graph Definitions for the verify workflow

START → newton → height → (decay ∥ knapp) → aggregate → save → END

A failure in newton or height routes straight to aggregate so a report
with the error records is still written.
"""

import logging

from langgraph.graph import StateGraph, END, START

from .state import VerifyState
from .nodes import (
    newton_node,
    height_node,
    decay_node,
    knapp_node,
    aggregate_node,
    save_node,
    after_newton_router,
    after_height_router,
)

logger = logging.getLogger(__name__)


def _build_graph() -> StateGraph:
    graph = StateGraph(VerifyState)

    graph.add_node("newton", newton_node)
    graph.add_node("height", height_node)
    graph.add_node("decay", decay_node)
    graph.add_node("knapp", knapp_node)
    graph.add_node("aggregate", aggregate_node)
    graph.add_node("save", save_node)

    graph.add_edge(START, "newton")
    graph.add_conditional_edges("newton", after_newton_router, ["height", "aggregate"])
    graph.add_conditional_edges("height", after_height_router, ["decay", "knapp", "aggregate"])

    # decay and knapp run in parallel and converge on the aggregator
    graph.add_edge(["decay", "knapp"], "aggregate")

    graph.add_edge("aggregate", "save")
    graph.add_edge("save", END)
    return graph


def create_verify_graph():
    """
    Create the verify graph

    Returns:
        Compiled StateGraph
    """
    return _build_graph().compile()

