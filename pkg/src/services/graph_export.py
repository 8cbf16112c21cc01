"""
Graph export - Graphviz DOT text for pattern and cluster graphs
"""
from fractions import Fraction
from typing import Iterable, Optional

from src.models.errors import UnsupportedModelError
from src.models.results import PatternGraph
from src.services.chain_builder import occupation_label


def _gvquote(s) -> str:
    return '"{}"'.format(str(s).replace('"', r'\"'))


def _format_probability(value) -> str:
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return f"{float(value):.12g}"


def _node_caption(node) -> str:
    if node.state is None:
        return str(node.label)
    try:
        basis = occupation_label(node.state)
    except UnsupportedModelError:
        basis = None
    return f"|{basis}>" if basis else str(node.label)


def graph_to_dot(graph: PatternGraph, name: str = "pattern", max_width: float = 2.0) -> Iterable[str]:
    """
    Produce the DOT description as an iterable of lines

    Nodes come out sorted by label and edges by (source, symbol, target).
    Node width grows with the visit count. An empty graph yields only the
    digraph header and closing brace.

        with open('pattern.dot', 'w') as f:
            f.writelines(graph_to_dot(graph))
    """
    yield "digraph {} {{\n".format(_gvquote(name))
    if graph.node_count:
        yield "  rankdir=LR;\n"
        top = max((n.visits for n in graph.nodes.values()), default=0)
        for node in sorted(graph.nodes.values(), key=lambda n: n.label):
            width = 0.5 + (max_width - 0.5) * (node.visits / top if top else 0.0)
            shape = "doublecircle" if node.label in graph.frontier else "circle"
            yield "  {} [label={} shape={} width={:.3f} visits={}];\n".format(
                node.label, _gvquote(_node_caption(node)), shape, width, node.visits,
            )
        for edge in sorted(graph.edges, key=lambda e: (e.source, e.symbol, e.target)):
            yield "  {} -> {} [label={} probability={}];\n".format(
                edge.source, edge.target, _gvquote(edge.symbol), _gvquote(_format_probability(edge.probability)),
            )
    yield "}\n"


def render_dot(graph: PatternGraph, name: str = "pattern", path: Optional[str] = None) -> str:
    """DOT text for a graph; also written to path when given"""
    text = "".join(graph_to_dot(graph, name))
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    return text
