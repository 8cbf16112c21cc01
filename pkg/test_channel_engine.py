#!/usr/bin/env python3
"""
Channel Engine Tests
====================
Liouvillian, no-jump generator, channel maps, jump steady state, positivity
and the Drazin cross-check
"""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from src.algebra import ExactMatrix, random_density, random_hermitian, trace_functional, vectorize
from src.models.errors import DarkSubspaceError, UnsupportedModelError
from src.models.open_system import EXACT, FLOAT, ChainSpec
from src.services.chain_builder import build_lindblad_model, build_xy_chain
from src.services.channel_engine import ChannelEngine
from src.services.jump_statistics import JumpStatistics


def test_single_site_closed_form():
    """L=1 XX: L_0 = -gamma Id, pi = I/2, K = gamma"""
    print("=" * 60)
    print("TEST 1: Single-site chain")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    exact = engine.build_channel_maps(build_xy_chain(ChainSpec(1, gamma=1), EXACT))
    assert exact.no_jump.matrix == ExactMatrix.identity(4) * -1
    assert exact.jss == ExactMatrix.from_entries([["1/2", 0], [0, "1/2"]])
    assert exact.activity == 1
    assert exact.diagnostics["exact_stationarity"]
    print("✓ Exact: L_0 = -Id, pi = I/2, K = 1")

    floating = engine.build_channel_maps(build_xy_chain(ChainSpec(1, gamma=2.5), FLOAT))
    assert np.allclose(floating.no_jump.matrix, -2.5 * np.eye(4))
    assert np.allclose(floating.jss, np.eye(2) / 2)
    assert abs(floating.activity - 2.5) < 1e-12
    print("✓ Float gamma=2.5: L_0 = -2.5 Id, K = 2.5")


def test_channel_map_structure():
    """Trace preservation of M, stationarity of pi and the spectral bound"""
    print("=" * 60)
    print("TEST 2: M = sum_k M_k")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    for spec in (ChainSpec(2, gamma=1), ChainSpec(3, gamma=Fraction(1, 2)), ChainSpec(3, gamma=1, kappa=Fraction(1, 2))):
        process = engine.build_channel_maps(build_xy_chain(spec, FLOAT))
        d = process.dim
        tf = trace_functional(d)
        total = process.total_map.matrix
        assert np.allclose(tf @ total, tf, atol=1e-10)
        assert np.allclose(total @ vectorize(process.jss), vectorize(process.jss), atol=1e-10)
        assert process.spectrum.spectral_radius <= 1 + 1e-9
        assert abs(process.spectrum.eigenvalues[process.spectrum.stationary_index()] - 1) < 1e-9
        assert abs(np.trace(process.jss) - 1) < 1e-12
        print(f"✓ {process.model.name}: <<1|M = <<1|, M pi = pi, max|mu| = {process.spectrum.spectral_radius:.6f}")

    exact = engine.build_channel_maps(build_xy_chain(ChainSpec(2, gamma=1), EXACT))
    assert exact.diagnostics["exact_stationarity"]
    assert exact.to_float().to_float() is exact.to_float()
    assert not exact.to_float().is_exact
    assert np.allclose(exact.to_float().total_map.matrix,
                       engine.build_channel_maps(build_xy_chain(ChainSpec(2, gamma=1), FLOAT)).total_map.matrix)
    print("✓ Exact L=2 process: M pi = pi exactly; float view matches the float build")


def test_positivity():
    """Each M_k maps density matrices to positive operators"""
    print("=" * 60)
    print("TEST 3: Positivity of channel maps")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    process = engine.build_channel_maps(build_xy_chain(ChainSpec(2, gamma=1), FLOAT))
    for label in process.alphabet:
        report = engine.positivity_check(process, label, trials=50, seed=4)
        assert report.passed, report.to_dict()
        print(f"✓ M_{label}: worst min eigenvalue {report.worst_min_eigenvalue:.2e}")


def test_drazin_relations():
    """L_0^-1 and M rebuilt from the Drazin inverse agree with the direct ones"""
    print("=" * 60)
    print("TEST 4: Drazin cross-check")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    for length in (1, 2, 3):
        process = engine.build_channel_maps(build_xy_chain(ChainSpec(length, gamma=1), FLOAT))
        report = engine.verify_drazin_relations(process)
        assert report.consistent, report.to_dict()
        print(f"✓ L={length}: relations hold {report.to_dict()}")

    process = engine.build_channel_maps(build_xy_chain(ChainSpec(1, gamma=1), FLOAT))
    drazin = engine.drazin_inverse(process).drazin.matrix
    eigen_sum = engine.eigen_drazin(process.liouvillian.matrix)
    assert np.allclose(drazin, eigen_sum, atol=1e-8)
    print("✓ Projector and eigen-sum Drazin inverses agree")


def test_unsupported_and_dark():
    """Partial monitoring and dark no-jump generators"""
    print("=" * 60)
    print("TEST 5: Partially monitored and dark models")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    raise_op = [[0, 1], [0, 0]]
    lower = [[0, 0], [1, 0]]
    partial = build_lindblad_model([[0, 0], [0, 0]], [("up", raise_op), ("down", lower)], monitored=["up"])
    process = engine.build_channel_maps(partial)
    assert process.alphabet == ["up"]
    assert np.allclose(process.total_map.matrix @ vectorize(process.jss), vectorize(process.jss), atol=1e-10)
    try:
        engine.verify_drazin_relations(process)
        assert False, "Drazin relations accepted a partially monitored model"
    except UnsupportedModelError:
        pass
    print("✓ Unmonitored decay stays inside L_0; Drazin check refuses the model")

    # decay alone: L_0 vanishes on the empty level |1><1|
    frozen = build_lindblad_model([[0, 0], [0, 0]], [("down", lower)], field=EXACT)
    try:
        engine.build_channel_maps(frozen)
        assert False, "dark no-jump generator accepted"
    except DarkSubspaceError:
        pass
    print("✓ Dark subspace detected")


def _random_model(rng: np.random.Generator, index: int, partial: bool = False):
    """Random H and 1-3 Ginibre jump operators on d <= 8"""
    d = int(rng.integers(2, 9))
    n_jumps = int(rng.integers(1, 4))
    jumps = []
    for j in range(n_jumps):
        op = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2 * d)
        jumps.append((f"k{j}", op))
    monitored = [jumps[0][0]] if partial else None
    return build_lindblad_model(random_hermitian(d, rng, 0.5), jumps, monitored=monitored, name=f"random-{index}")


def _tuple_array(distribution, alphabet_size: int) -> np.ndarray:
    return distribution.as_vector().reshape((alphabet_size,) * distribution.order)


def test_randomized_models():
    """Spectral bound, trace preservation, stationarity and shift invariance on random models"""
    print("=" * 60)
    print("TEST 6: Randomized models")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    stats = JumpStatistics(threads=1, verbose=False)
    rng = np.random.default_rng(2026)
    drift = 0.0
    for index in range(60):
        process = engine.build_channel_maps(_random_model(rng, index))
        d = process.dim
        a = len(process.alphabet)
        tf = trace_functional(d)
        total = process.total_map.matrix
        pi = vectorize(process.jss)
        assert process.spectrum.spectral_radius <= 1 + 1e-10, process.model.name
        assert np.max(np.abs(tf @ total - tf)) <= 1e-11, process.model.name
        assert np.max(np.abs(total @ pi - pi)) <= 1e-10, process.model.name

        previous = stats.full_distribution(process, 1)
        for n in range(2, 5):
            current = stats.full_distribution(process, n)
            assert abs(current.total() - 1) < 1e-10
            shifted = _tuple_array(current, a).sum(axis=0)
            assert np.allclose(shifted.ravel(), previous.as_vector(), atol=1e-10), (process.model.name, n)
            previous = current

        if a >= 2:
            rho = random_density(d, rng, 1)
            pair = _tuple_array(stats.full_distribution(process, 2, initial=rho), a)
            drift = max(drift, float(np.max(np.abs(pair.sum(axis=1) - pair.sum(axis=0)))))
    assert drift > 1e-6
    print("✓ 60 models: max|mu| <= 1, <<1|M = <<1|, M pi = pi, shift invariance for N <= 4")
    print(f"✓ Off pi the first two symbols differ in law (max gap {drift:.3e})")


def test_random_positivity():
    """M_k rho stays positive for random fully and partially monitored models"""
    print("=" * 60)
    print("TEST 7: Positivity on random models")
    print("=" * 60)

    engine = ChannelEngine(verbose=False)
    rng = np.random.default_rng(77)
    pairs = 0
    partial_models = 0
    for index in range(40):
        partial = index % 2 == 1
        model = _random_model(rng, index, partial=partial)
        partial_models += not model.fully_monitored
        process = engine.build_channel_maps(model)
        for label in process.alphabet:
            report = engine.positivity_check(process, label, trials=3, seed=index)
            assert report.worst_min_eigenvalue >= -1e-12, report.to_dict()
            pairs += report.trials
    assert pairs >= 100 and partial_models > 0
    print(f"✓ {pairs} (model, rho) pairs, {partial_models} partially monitored models")


def main():
    """Run all tests"""
    print("\n" + "=" * 60)
    print("  CHANNEL ENGINE - TESTS")
    print("=" * 60 + "\n")

    try:
        test_single_site_closed_form()
        test_channel_map_structure()
        test_positivity()
        test_drazin_relations()
        test_unsupported_and_dark()
        test_randomized_models()
        test_random_positivity()

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
