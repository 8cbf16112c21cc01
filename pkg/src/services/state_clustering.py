"""
State Clustering Service
Approximate patterns for processes without a closed pattern: sampled post-jump
states are grouped by single-linkage agglomeration on the distance between
their predicted futures, and a cluster-level graph is built from the observed
transitions.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import DisjointSet, cut_tree
from scipy.spatial.distance import pdist, squareform

from src.algebra.dense import trace_functional, vectorize
from src.config.analysis_config import (
    BURN_IN,
    ENUMERATION_CAP,
    HORIZON,
    MAX_THREADS,
    SAMPLE_COUNT,
    VERBOSE_LOGGING,
    WEIGHT_MIN,
)
from src.models.errors import ConfigError, DimensionError
from src.models.process import ChannelProcess
from src.models.results import (
    ClusterModel,
    Dendrogram,
    FutureSignature,
    PatternClassification,
    PatternGraph,
    QualityPoint,
    TrajectoryRecord,
)
from src.services.jump_statistics import check_enumeration, clamp_probabilities, expand_tuples
from src.services.trajectory_sampler import TrajectorySampler

METRICS = ("probability", "trace")


def _as_array(state) -> np.ndarray:
    return state.to_numpy() if hasattr(state, "to_numpy") else np.asarray(state, dtype=complex)


def single_linkage(distances: np.ndarray) -> Dendrogram:
    """
    Single-linkage merge history of a square distance matrix

    Pairs are processed in order of (distance, i, j) with i < j, which breaks
    ties towards the lowest state indices. The linkage array follows the
    scipy.cluster.hierarchy layout: row m merges nodes Z[m, 0] < Z[m, 1]
    at height Z[m, 2] into node n + m of size Z[m, 3].
    """
    distances = np.asarray(distances, dtype=float)
    n = distances.shape[0]
    if distances.shape != (n, n):
        raise DimensionError(f"Distance matrix must be square, got {distances.shape}")
    rows, cols = np.triu_indices(n, k=1)
    values = distances[rows, cols]
    order = np.lexsort((cols, rows, values))

    forest = DisjointSet(range(n))
    node_id = {i: i for i in range(n)}
    smallest = {i: i for i in range(n)}
    merges = []
    linkage = np.zeros((max(n - 1, 0), 4))
    for index in order:
        if len(merges) == n - 1:
            break
        a, b = forest[int(rows[index])], forest[int(cols[index])]
        if a == b:
            continue
        left, right = sorted((node_id[a], node_id[b]))
        pair = sorted((smallest[a], smallest[b]))
        forest.merge(a, b)
        root = forest[a]
        m = len(merges)
        linkage[m] = (left, right, values[index], forest.subset_size(root))
        node_id[root] = n + m
        smallest[root] = pair[0]
        merges.append((pair[0], pair[1], float(values[index])))
    return Dendrogram(n_samples=n, merges=merges, linkage=linkage)


def cut_dendrogram(dendrogram: Dendrogram, n_clusters: int) -> np.ndarray:
    """Assignment after the first n - n_clusters merges; ids ordered by smallest member"""
    n = dendrogram.n_samples
    if not 1 <= n_clusters <= n:
        raise ConfigError(f"Cannot cut {n} samples into {n_clusters} clusters")
    if n == 1:
        return np.zeros(1, dtype=int)
    labels = cut_tree(dendrogram.linkage, n_clusters=[n_clusters])[:, 0]
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=int)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse]


class StateClusterer:
    """
    Future-signature clustering of post-jump states

    Usage:
        clusterer = StateClusterer(horizon=6)
        record = clusterer.collect_samples(process, 2000, seed=1)
        model = clusterer.cluster(process, record.states, 12)
    """

    def __init__(
        self,
        horizon: int = HORIZON,
        metric: str = "probability",
        weight_min: float = WEIGHT_MIN,
        enumeration_cap: int = ENUMERATION_CAP,
        threads: int = MAX_THREADS,
        verbose: bool = None,
    ):
        if metric not in METRICS:
            raise ConfigError(f"Unknown metric '{metric}'. Choose from: {', '.join(METRICS)}")
        if horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {horizon}")
        self.horizon = horizon
        self.metric = metric
        self.weight_min = weight_min
        self.enumeration_cap = enumeration_cap
        self.threads = max(1, int(threads))
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose

    # ========== Signatures ==========

    def future_signature(self, process: ChannelProcess, rho, n: int = None) -> FutureSignature:
        """P(k1..kn | rho) for every tuple, lexicographic order"""
        n = self.horizon if n is None else n
        fp = process.to_float()
        check_enumeration(len(fp.alphabet), n, self.enumeration_cap)
        maps = [fp.channel_matrix(k) for k in fp.alphabet]
        block = expand_tuples(maps, vectorize(_as_array(rho)).reshape(-1, 1), n)
        vector = clamp_probabilities(trace_functional(fp.dim) @ block)
        return FutureSignature(horizon=n, alphabet=list(fp.alphabet), vector=vector)

    @staticmethod
    def distance(first: FutureSignature, second: FutureSignature) -> float:
        if first.horizon != second.horizon or len(first.vector) != len(second.vector):
            raise DimensionError(f"Signature horizons differ: {first.horizon} vs {second.horizon}")
        return float(np.linalg.norm(first.vector - second.vector))

    def signature_matrix(self, process: ChannelProcess, samples: Sequence, n: int = None) -> np.ndarray:
        """One signature per row, computed in parallel over samples"""
        n = self.horizon if n is None else n
        process.to_float()

        def run(index: int) -> np.ndarray:
            return self.future_signature(process, samples[index], n).vector

        if self.threads > 1 and len(samples) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                rows = list(executor.map(run, range(len(samples))))
        else:
            rows = [run(i) for i in range(len(samples))]
        return np.vstack(rows)

    def distance_matrix(self, process: ChannelProcess, samples: Sequence, n: int = None) -> np.ndarray:
        if len(samples) == 1:
            return np.zeros((1, 1))
        if self.metric == "probability":
            return squareform(pdist(self.signature_matrix(process, samples, n), metric="euclidean"))
        stack = np.stack([_as_array(s) for s in samples])

        def row(i: int) -> np.ndarray:
            return 0.5 * np.linalg.svd(stack[i + 1:] - stack[i], compute_uv=False).sum(axis=1)

        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                upper = list(executor.map(row, range(len(samples) - 1)))
        else:
            upper = [row(i) for i in range(len(samples) - 1)]
        return squareform(np.concatenate(upper), checks=False)

    # ========== Clustering ==========

    def build_model(self, distances: np.ndarray, dendrogram: Dendrogram, n_clusters: int) -> ClusterModel:
        assignment = cut_dendrogram(dendrogram, n_clusters)
        indicator = np.zeros((len(assignment), n_clusters))
        indicator[np.arange(len(assignment)), assignment] = 1.0
        populations = indicator.sum(axis=0)
        between = indicator.T @ distances @ indicator / np.outer(populations, populations)

        representatives = []
        diameters = np.zeros(n_clusters)
        for c in range(n_clusters):
            members = np.flatnonzero(assignment == c)
            block = distances[np.ix_(members, members)]
            representatives.append(int(members[int(np.argmin(block.sum(axis=1)))]))
            diameters[c] = float(block.max())
        return ClusterModel(
            n_clusters=n_clusters,
            assignment=assignment,
            representatives=representatives,
            distance_matrix=between,
            diameters=diameters,
            populations=[int(p) for p in populations],
            metric=self.metric,
        )

    def cluster(self, process: ChannelProcess, samples: Sequence, n_clusters: int, n: int = None) -> ClusterModel:
        """
        Single-linkage clustering of samples into exactly n_clusters groups

        D[i, j] averages the pairwise distances between members of clusters i
        and j; the diagonal averages within a cluster and is 0 for singletons.
        """
        if not 1 <= n_clusters <= len(samples):
            raise ConfigError(f"Need 1 <= N_c <= {len(samples)} samples, got N_c = {n_clusters}")
        distances = self.distance_matrix(process, samples, n)
        model = self.build_model(distances, single_linkage(distances), n_clusters)
        if self.verbose:
            print(f"✓ {len(samples)} states in {n_clusters} clusters, "
                  f"max intra-cluster distance {model.max_intra_distance:.4g}")
        return model

    def quality_curve(self, process: ChannelProcess, samples: Sequence, cluster_counts: Sequence[int], n: int = None) -> List[QualityPoint]:
        """(N_c, max_i D[i, i], max diameter) for each requested count, from one dendrogram"""
        for count in cluster_counts:
            if not 1 <= count <= len(samples):
                raise ConfigError(f"Need 1 <= N_c <= {len(samples)} samples, got N_c = {count}")
        distances = self.distance_matrix(process, samples, n)
        dendrogram = single_linkage(distances)
        points = []
        for count in cluster_counts:
            model = self.build_model(distances, dendrogram, count)
            points.append(QualityPoint(count, model.max_intra_distance, float(model.diameters.max())))
        return points

    def cluster_graph(self, model: ClusterModel, record: TrajectoryRecord, weight_min: float = None) -> PatternGraph:
        """
        Cluster-level transition graph with majority-flow edges

        The samples are record.states in order, so sample t emitted
        record.symbols[t] and moved to sample t + 1. For each cluster i and
        symbol k only the most frequent successor cluster j is kept (lowest j
        on ties), so every node has at most one edge per symbol. The edge
        weight is the fraction of cluster-i samples that emitted k and landed
        in j; edges below weight_min are dropped.
        """
        weight_min = self.weight_min if weight_min is None else weight_min
        if len(record.states) != len(model.assignment) or record.thin != 1:
            raise DimensionError("Cluster assignment must cover every stored state of the record")
        graph = PatternGraph(exact=False, classification=PatternClassification.OPEN)
        for c in range(model.n_clusters):
            graph.add_node(c + 1, record.states[model.representatives[c]], model.populations[c])

        counts = {}
        outgoing = np.zeros(model.n_clusters)
        for t, symbol in enumerate(record.symbols):
            source, target = int(model.assignment[t]), int(model.assignment[t + 1])
            flows = counts.setdefault((source, symbol), np.zeros(model.n_clusters, dtype=int))
            flows[target] += 1
            outgoing[source] += 1
        for (source, symbol), flows in sorted(counts.items()):
            target = int(np.argmax(flows))
            weight = flows[target] / outgoing[source]
            if weight >= weight_min:
                graph.add_edge(source + 1, symbol, target + 1, float(weight))
        graph.diagnostics["weight_min"] = weight_min
        graph.diagnostics["transitions"] = len(record.symbols)
        model.graph = graph
        return graph

    # ========== Sampling ==========

    def collect_samples(
        self,
        process: ChannelProcess,
        n_samples: int = SAMPLE_COUNT,
        burn_in: int = BURN_IN,
        seed=None,
        initial=None,
    ) -> TrajectoryRecord:
        """One trajectory whose stored states are the n_samples post-burn-in samples"""
        if n_samples < 2:
            raise ConfigError(f"Need at least 2 samples, got {n_samples}")
        sampler = TrajectorySampler(threads=1, verbose=self.verbose)
        return sampler.simulate(process, n_samples - 1, seed=seed, burn_in=burn_in, initial=initial)

    def run(
        self,
        process: ChannelProcess,
        cluster_counts: Sequence[int],
        n_samples: int = SAMPLE_COUNT,
        burn_in: int = BURN_IN,
        seed=None,
        initial=None,
    ) -> Tuple[TrajectoryRecord, Dendrogram, List[ClusterModel], List[QualityPoint]]:
        """Sample once, then cluster and build a graph for each count"""
        record = self.collect_samples(process, n_samples, burn_in, seed, initial)
        distances = self.distance_matrix(process, record.states)
        dendrogram = single_linkage(distances)
        models = []
        for count in cluster_counts:
            if not 1 <= count <= len(record.states):
                raise ConfigError(f"Need 1 <= N_c <= {len(record.states)} samples, got N_c = {count}")
            model = self.build_model(distances, dendrogram, count)
            self.cluster_graph(model, record)
            models.append(model)
        quality = [QualityPoint(m.n_clusters, m.max_intra_distance, float(m.diameters.max())) for m in models]
        return record, dendrogram, models, quality
