#!/usr/bin/env python3
"""
State Clustering Tests
======================
Future signatures, single-linkage agglomeration, cluster distance matrices
and cluster-level transition graphs
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist, squareform

from src.models.errors import ConfigError, DimensionError
from src.models.open_system import FLOAT, ChainSpec
from src.services.chain_builder import build_xy_chain, occupation_label, occupation_state
from src.services.channel_engine import ChannelEngine
from src.services.jump_statistics import JumpStatistics
from src.services.state_clustering import StateClusterer, cut_dendrogram, single_linkage

ENGINE = ChannelEngine(verbose=False)


def _process(length: int, gamma=1, kappa=0):
    return ENGINE.build_channel_maps(build_xy_chain(ChainSpec(length, gamma=gamma, kappa=kappa), FLOAT))


def test_future_signatures():
    """Signatures are conditional tuple laws; distances are Euclidean"""
    print("=" * 60)
    print("TEST 1: Future signatures")
    print("=" * 60)

    process = _process(2)
    clusterer = StateClusterer(horizon=3, verbose=False)
    signature = clusterer.future_signature(process, occupation_state("10"))
    assert signature.tuples()[:2] == ["EEE", "EEI"]
    assert abs(signature.vector.sum() - 1) < 1e-10
    from_pi = clusterer.future_signature(process, process.jss)
    assert np.allclose(from_pi.vector, JumpStatistics(verbose=False).full_distribution(process, 3).as_vector())
    print("✓ Signature of pi equals the order-3 joint law")

    # |10> emits E or I with probability 1/2 each
    first = clusterer.future_signature(process, occupation_state("10"), 1)
    assert np.allclose(first.vector, [0.5, 0.5])
    other = clusterer.future_signature(process, occupation_state("11"), 1)
    assert np.allclose(other.vector, [1.0, 0.0])
    assert abs(StateClusterer.distance(first, other) - np.sqrt(0.5)) < 1e-12
    print("✓ d(|10>, |11>) = sqrt(1/2) at horizon 1")

    try:
        StateClusterer.distance(first, signature)
        assert False, "horizon mismatch accepted"
    except DimensionError:
        pass
    print("✓ Different horizons refused")


def test_single_linkage():
    """Merge order, tie handling and scipy-compatible linkage"""
    print("=" * 60)
    print("TEST 2: Single linkage")
    print("=" * 60)

    points = np.array([[0.0], [1.0], [3.0]])
    distances = squareform(pdist(points))
    dendrogram = single_linkage(distances)
    assert dendrogram.merges == [(0, 1, 1.0), (0, 2, 2.0)]
    assert np.allclose(dendrogram.linkage, [[0, 1, 1, 2], [2, 3, 2, 3]])
    assert list(cut_dendrogram(dendrogram, 2)) == [0, 0, 1]
    print("✓ Points 0, 1, 3: {0,1} at 1, then {0,1,2} at 2")

    rng = np.random.default_rng(8)
    cloud = rng.normal(size=(25, 3))
    ours = single_linkage(squareform(pdist(cloud))).linkage
    reference = linkage(pdist(cloud), method="single")
    assert np.allclose(ours[:, 2], reference[:, 2])
    assert np.allclose(ours[:, 3], reference[:, 3])
    print("✓ Merge heights and sizes match scipy on 25 random points")

    ours_cut = cut_dendrogram(single_linkage(squareform(pdist(cloud))), 5)
    theirs_cut = fcluster(reference, 5, criterion="maxclust")
    pairs_ours = ours_cut[:, None] == ours_cut[None, :]
    pairs_theirs = theirs_cut[:, None] == theirs_cut[None, :]
    assert np.array_equal(pairs_ours, pairs_theirs)
    assert ours_cut[0] == 0 and ours_cut.max() == 4
    print("✓ Five-cluster cut matches scipy fcluster")

    ties = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    assert single_linkage(ties).merges == [(0, 1, 1.0), (0, 2, 1.0)]
    print("✓ Equal distances merge lowest indices first")

    try:
        cut_dendrogram(dendrogram, 4)
        assert False, "more clusters than samples accepted"
    except ConfigError:
        pass


def test_cluster_model():
    """Duplicates share a cluster with zero intra-cluster distance"""
    print("=" * 60)
    print("TEST 3: Cluster distance matrix")
    print("=" * 60)

    process = _process(2)
    clusterer = StateClusterer(horizon=4, threads=1, verbose=False)
    samples = [occupation_state("10"), occupation_state("10"), occupation_state("00")]
    model = clusterer.cluster(process, samples, 2)
    assert list(model.assignment) == [0, 0, 1]
    assert model.populations == [2, 1]
    assert model.distance_matrix[0, 0] == 0.0 and model.distance_matrix[1, 1] == 0.0
    assert model.distance_matrix[0, 1] > 0
    assert np.allclose(model.distance_matrix, model.distance_matrix.T)
    print(f"✓ D = {model.distance_matrix.round(4).tolist()}")

    traced = StateClusterer(metric="trace", threads=1, verbose=False)
    assert np.allclose(traced.distance_matrix(process, samples), [[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    print("✓ Trace-distance backend")

    for bad in (lambda: StateClusterer(metric="cosine"), lambda: clusterer.cluster(process, samples, 4)):
        try:
            bad()
            assert False, "invalid clustering request accepted"
        except ConfigError:
            pass
    print("✓ Unknown metric and N_c > samples rejected")


def test_recovers_closed_pattern():
    """L=2 samples at N_c=3 reproduce the {|11>, |10>, |00>} partition and its edges"""
    print("=" * 60)
    print("TEST 4: Clustering a closed pattern")
    print("=" * 60)

    process = _process(2)
    clusterer = StateClusterer(horizon=4, verbose=False)
    record, dendrogram, models, quality = clusterer.run(process, [3], n_samples=300, burn_in=0, seed=6, initial="11")
    model = models[0]
    names = [occupation_label(state) for state in record.states]
    assert set(names) == {"11", "10", "00"}
    for cluster_id in range(3):
        assert len({names[i] for i in model.members(cluster_id)}) == 1
    assert model.max_intra_distance < 1e-12
    print(f"✓ Partition recovered: populations {model.populations}")

    graph = model.graph
    caption = {label: occupation_label(node.state) for label, node in graph.nodes.items()}
    edges = {(caption[e.source], e.symbol, caption[e.target]): e.probability for e in graph.edges}
    assert set(edges) == {("11", "E", "10"), ("10", "I", "11"), ("10", "E", "00"), ("00", "I", "10")}
    assert edges[("11", "E", "10")] == 1.0 and edges[("00", "I", "10")] == 1.0
    assert abs(edges[("10", "E", "00")] - 0.5) < 0.15
    print("✓ Cluster graph has the four pattern edges")

    assert dendrogram.linkage.shape == (299, 4)
    assert quality[0].n_clusters == 3


def test_quality_curve():
    """Finer cuts never widen the clusters"""
    print("=" * 60)
    print("TEST 5: Quality curve")
    print("=" * 60)

    process = _process(3, kappa=0.5)
    clusterer = StateClusterer(horizon=4, verbose=False)
    record = clusterer.collect_samples(process, 120, burn_in=20, seed=2)
    assert len(record.states) == 120
    points = clusterer.quality_curve(process, record.states, [2, 12, 32, 120])
    diameters = [p.max_diameter for p in points]
    assert all(a >= b - 1e-12 for a, b in zip(diameters, diameters[1:]))
    assert points[-1].max_intra_distance == 0.0
    print(f"✓ Max diameters {np.round(diameters, 4).tolist()}")


def test_majority_edges():
    """At most one edge per (node, symbol); weights are successor fractions"""
    print("=" * 60)
    print("TEST 6: Majority-flow cluster edges")
    print("=" * 60)

    process = _process(3, kappa=0.5)
    clusterer = StateClusterer(horizon=4, verbose=False)
    record, _, models, _ = clusterer.run(process, [12], n_samples=600, burn_in=50, seed=4)
    graph = models[0].graph
    alphabet = process.alphabet
    keys = [(e.source, e.symbol) for e in graph.edges]
    assert len(keys) == len(set(keys))
    assert len(graph.edges) <= 12 * len(alphabet)
    for label in graph.nodes:
        assert len(graph.out_edges(label)) <= len(alphabet)
    for edge in graph.edges:
        assert clusterer.weight_min <= edge.probability <= 1.0
    mass = graph.outgoing_mass()
    assert all(total <= 1.0 + 1e-12 for total in mass.values())
    print(f"✓ {len(graph.edges)} edges over 12 clusters, out-degree <= {len(alphabet)}")

    # the majority target wins even when the minority flow clears weight_min
    assignment = models[0].assignment
    source = int(assignment[0])
    flows = {}
    for t, symbol in enumerate(record.symbols):
        if int(assignment[t]) == source:
            flows.setdefault(symbol, []).append(int(assignment[t + 1]))
    for symbol, targets in flows.items():
        counts = np.bincount(targets, minlength=12)
        expected = [e for e in graph.out_edges(source + 1) if e.symbol == symbol]
        weight = counts.max() / sum(len(v) for v in flows.values())
        if weight >= clusterer.weight_min:
            assert len(expected) == 1 and expected[0].target == int(np.argmax(counts)) + 1
            assert abs(expected[0].probability - weight) < 1e-12
    print("✓ Edge targets are the most frequent successor clusters")


def test_clustering_workload():
    """XY L=3, kappa=1/2: 32 clusters are tighter than 12 at the default horizon"""
    print("=" * 60)
    print("TEST 7: Clustering workload at default settings")
    print("=" * 60)

    process = _process(3, kappa=0.5)
    clusterer = StateClusterer(verbose=False)
    assert clusterer.horizon == 6
    _, _, models, quality = clusterer.run(process, [12, 32], n_samples=2000, seed=1)
    coarse, fine = quality
    assert fine.max_intra_distance < coarse.max_intra_distance
    assert fine.max_diameter <= coarse.max_diameter + 1e-12
    for model in models:
        assert sum(model.populations) == 2000
        assert len(model.graph.edges) <= model.n_clusters * len(process.alphabet)
    print(f"✓ D(32) = {fine.max_intra_distance:.5f} < D(12) = {coarse.max_intra_distance:.5f}")


def main():
    """Run all tests"""
    print("\n" + "=" * 60)
    print("  STATE CLUSTERING - TESTS")
    print("=" * 60 + "\n")

    try:
        test_future_signatures()
        test_single_linkage()
        test_cluster_model()
        test_recovers_closed_pattern()
        test_quality_curve()
        test_majority_edges()
        test_clustering_workload()

        print("=" * 60)
        print("  ✅ ALL TESTS PASSED!")
        print("=" * 60)
        return 0

    except Exception as e:
        print(f"\n❌ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    exit(main())
