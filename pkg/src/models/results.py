"""
Result records for statistics, trajectories, patterns and clustering
"""
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.errors import DimensionError


def _key(sequence) -> Tuple[str, ...]:
    # "EIE" and ("E", "I", "E") address the same entry
    return tuple(sequence)


# ==================== Statistics ====================

@dataclass
class JointDistribution:
    """
    P(k1,...,kN) over all tuples of the alphabet
    Table iteration order is lexicographic in the alphabet order
    """
    order: int
    alphabet: List[str]
    table: Dict[Tuple[str, ...], float]
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def probability(self, sequence) -> float:
        return self.table.get(_key(sequence), 0.0)

    def total(self) -> float:
        return float(sum(self.table.values()))

    def as_vector(self) -> np.ndarray:
        return np.array(list(self.table.values()), dtype=float)

    def to_rows(self) -> List[Tuple[str, float]]:
        """(joined sequence, probability) rows, e.g. ("EI", 0.375)"""
        return [("".join(seq), p) for seq, p in self.table.items()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "alphabet": self.alphabet,
            "table": dict(self.to_rows()),
            "diagnostics": self.diagnostics,
        }


@dataclass
class LikelihoodResult:
    """ln P(sequence); impossible sequences carry -inf and the flag"""
    log_likelihood: float
    impossible: bool
    length: int
    impossible_at: Optional[int] = None

    @property
    def probability(self) -> float:
        return 0.0 if self.impossible else float(np.exp(self.log_likelihood))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "log_likelihood": self.log_likelihood,
            "impossible": self.impossible,
            "length": self.length,
            "impossible_at": self.impossible_at,
        }


# ==================== Trajectories ====================

@dataclass
class TrajectoryRecord:
    """Symbols and post-jump states of one simulated run (after burn-in)"""
    seed: Any
    symbols: List[str]
    states: List[np.ndarray]
    initial: np.ndarray
    burn_in: int = 0
    thin: int = 1
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def symbol_string(self) -> str:
        return "".join(self.symbols)

    @property
    def steps(self) -> int:
        return len(self.symbols)

    def transitions(self) -> Iterable[Tuple[np.ndarray, str, np.ndarray]]:
        """(state, emitted symbol, successor) triples; needs unthinned states"""
        if self.thin != 1 or len(self.states) != len(self.symbols) + 1:
            raise DimensionError("Transitions need an unthinned record with all states")
        for i, symbol in enumerate(self.symbols):
            yield self.states[i], symbol, self.states[i + 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": str(self.seed),
            "symbols": self.symbol_string,
            "burn_in": self.burn_in,
            "stored_states": len(self.states),
            "diagnostics": self.diagnostics,
        }


# ==================== Patterns ====================

class PatternClassification(Enum):
    RENEWAL = "renewal"
    CLOSED = "closed"
    RECURRING = "recurring"
    OPEN = "open"


@dataclass
class PatternNode:
    label: int
    state: Any
    visits: int = 0


@dataclass
class PatternEdge:
    source: int
    symbol: str
    target: int
    probability: Any  # Fraction in exact mode, float otherwise

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "symbol": self.symbol,
            "target": self.target,
            "probability": str(self.probability),
        }


@dataclass
class PatternGraph:
    """Labeled directed multigraph of post-jump states with channel-labeled edges"""
    nodes: Dict[int, PatternNode] = field(default_factory=dict)
    edges: List[PatternEdge] = field(default_factory=list)
    classification: PatternClassification = PatternClassification.OPEN
    exact: bool = True
    frontier: List[int] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def add_node(self, label: int, state, visits: int = 0) -> PatternNode:
        node = self.nodes.get(label)
        if node is None:
            node = PatternNode(label, state, visits)
            self.nodes[label] = node
        return node

    def add_edge(self, source: int, symbol: str, target: int, probability) -> PatternEdge:
        edge = PatternEdge(source, symbol, target, probability)
        self.edges.append(edge)
        return edge

    def out_edges(self, label: int) -> List[PatternEdge]:
        return [e for e in self.edges if e.source == label]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def is_closed(self) -> bool:
        """Every edge target is a node and nothing is left on the frontier"""
        return not self.frontier and all(e.target in self.nodes for e in self.edges)

    def outgoing_mass(self) -> Dict[int, Any]:
        totals: Dict[int, Any] = {label: 0 for label in self.nodes}
        for edge in self.edges:
            totals[edge.source] = totals.get(edge.source, 0) + edge.probability
        return totals

    def edge_set(self) -> set:
        return {(e.source, e.symbol, e.target) for e in self.edges}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classification": self.classification.value,
            "nodes": [{"label": n.label, "visits": n.visits} for n in sorted(self.nodes.values(), key=lambda n: n.label)],
            "edges": [e.to_dict() for e in self.edges],
            "frontier": list(self.frontier),
            "exact": self.exact,
        }


@dataclass
class PatternEvidence:
    """Output of stochastic exact pattern detection"""
    store: Any
    label_series: List[List[int]]
    first_repeat: List[Optional[int]]
    truncated: List[bool]
    seeds: List[Any] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def distinct_labels(self) -> int:
        return len(self.store)

    def repeated_labels(self) -> List[Tuple[int, int]]:
        """(label, total visits) for labels visited at least twice, most visited first"""
        counts: Dict[int, int] = {}
        for series in self.label_series:
            for label in series:
                counts[label] = counts.get(label, 0) + 1
        repeated = [(label, n) for label, n in counts.items() if n >= 2]
        return sorted(repeated, key=lambda item: (-item[1], item[0]))

    def revisit_fraction(self) -> float:
        """Fraction of trajectories in which some label appears twice"""
        if not self.label_series:
            return 0.0
        hits = sum(1 for series in self.label_series if len(set(series)) < len(series))
        return hits / len(self.label_series)


@dataclass
class RenewalResult:
    renewal: bool
    reset_states: Dict[str, Any]
    ranks: Dict[str, int]


@dataclass
class ClassificationResult:
    classification: PatternClassification
    graph: Optional[PatternGraph] = None
    evidence: Optional[PatternEvidence] = None
    renewal: Optional[RenewalResult] = None
    revisit_fraction: float = 0.0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classification": self.classification.value,
            "revisit_fraction": self.revisit_fraction,
            "distinct_labels": self.evidence.distinct_labels if self.evidence else None,
            "graph_nodes": self.graph.node_count if self.graph else None,
            "graph_edges": self.graph.edge_count if self.graph else None,
            "notes": self.notes,
        }


# ==================== Clustering ====================

@dataclass
class FutureSignature:
    """P(k1..kn | rho) over all alphabet^n tuples in lexicographic order"""
    horizon: int
    alphabet: List[str]
    vector: np.ndarray

    def tuples(self) -> List[str]:
        return ["".join(t) for t in product(self.alphabet, repeat=self.horizon)]


@dataclass
class Dendrogram:
    """Single-linkage merge history over n samples"""
    n_samples: int
    merges: List[Tuple[int, int, float]]
    linkage: np.ndarray


@dataclass
class ClusterModel:
    n_clusters: int
    assignment: np.ndarray
    representatives: List[int]
    distance_matrix: np.ndarray
    diameters: np.ndarray
    populations: List[int]
    metric: str = "probability"
    graph: Optional[PatternGraph] = None

    @property
    def max_intra_distance(self) -> float:
        return float(np.max(np.diag(self.distance_matrix))) if self.n_clusters else 0.0

    def members(self, cluster_id: int) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.assignment == cluster_id)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_clusters": self.n_clusters,
            "populations": self.populations,
            "representatives": self.representatives,
            "max_intra_distance": self.max_intra_distance,
            "metric": self.metric,
        }


@dataclass
class QualityPoint:
    n_clusters: int
    max_intra_distance: float
    max_diameter: float


def lexicographic_tuples(alphabet: Sequence[str], n: int) -> List[Tuple[str, ...]]:
    return list(product(alphabet, repeat=n))
