#!/usr/bin/env python3
"""
Jump Statistics Tests
=====================
Joint distributions, two-point laws, mutual information, conditioning and
likelihoods on boundary-driven chains
"""

import math
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from src.models.errors import ConditioningError, EnumerationCapError, UnknownSymbolError
from src.models.open_system import EXACT, FLOAT, ChainSpec
from src.services.chain_builder import build_xy_chain
from src.services.channel_engine import ChannelEngine
from src.services.jump_statistics import JumpStatistics
from src.services.trajectory_sampler import TrajectorySampler

ENGINE = ChannelEngine(verbose=False)


def _process(length: int, gamma=1, kappa=0, field: str = FLOAT):
    return ENGINE.build_channel_maps(build_xy_chain(ChainSpec(length, gamma=gamma, kappa=kappa), field))


def test_single_site_laws():
    """L=1 alternates strictly: EI and IE only"""
    print("=" * 60)
    print("TEST 1: Single-site statistics")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    process = _process(1)
    law = stats.single_outcome_law(process)
    assert abs(law["E"] - 0.5) < 1e-12 and abs(law["I"] - 0.5) < 1e-12
    assert abs(stats.current(process) - 0.5) < 1e-12
    print(f"✓ P(E) = P(I) = 1/2, current = {stats.current(process):.6f}")

    dist = stats.full_distribution(process, 2)
    expected = {("E", "E"): 0.0, ("E", "I"): 0.5, ("I", "E"): 0.5, ("I", "I"): 0.0}
    for sequence, p in expected.items():
        assert abs(dist.probability(sequence) - p) < 1e-12
    assert abs(stats.mutual_information(process, 2) - math.log(2)) < 1e-12
    print("✓ Order-2 law {EI: 1/2, IE: 1/2}; I(k1:k2) = ln 2")


def test_two_site_distribution():
    """L=2 XX at gamma=1: EE 1/8, EI 3/8, IE 3/8, II 1/8"""
    print("=" * 60)
    print("TEST 2: Two-site distribution")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    for field in (FLOAT, EXACT):
        process = _process(2, field=field)
        dist = stats.full_distribution(process, 2)
        assert [row[0] for row in dist.to_rows()] == ["EE", "EI", "IE", "II"]
        for (sequence, p), want in zip(dist.to_rows(), (1 / 8, 3 / 8, 3 / 8, 1 / 8)):
            assert abs(p - want) < 1e-12, (sequence, p)
        print(f"✓ {field}: {dict(dist.to_rows())}")

    process = _process(2)
    mi = stats.mutual_information(process, 2)
    assert abs(mi - (-0.25 * math.log(2) + 0.75 * math.log(1.5))) < 1e-12
    print(f"✓ I(k1:k2) = {mi:.5f}")

    for n in (1, 3, 5):
        assert abs(stats.full_distribution(process, n).total() - 1) < 1e-10
    print("✓ Distributions of order 1, 3, 5 are normalized")


def test_two_point_and_memory():
    """Direct and spectral two-point laws agree; MI decays with distance"""
    print("=" * 60)
    print("TEST 3: Two-point laws")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    process = _process(3, gamma=Fraction(1, 2))
    for n in (2, 3, 6, 12):
        for first, last, direct, spectral in stats.two_point_table(process, n):
            assert abs(direct - spectral) < 1e-9, (n, first, last, direct, spectral)
    print("✓ Spectral expansion matches repeated multiplication for N = 2..12")

    marginal = stats.single_outcome_law(process)
    for first in process.alphabet:
        row = sum(stats.two_point(process, first, last, 4) for last in process.alphabet)
        assert abs(row - marginal[first]) < 1e-10
    print("✓ Summing out k_N recovers P(k1)")

    sweep = stats.mutual_information_sweep(process, 30)
    assert [n for n, _ in sweep] == list(range(2, 31))
    assert all(value >= -1e-12 for _, value in sweep)
    assert sweep[-1][1] < sweep[0][1]
    print(f"✓ MI(2) = {sweep[0][1]:.4e} > MI(30) = {sweep[-1][1]:.4e}")


def test_conditioning_and_likelihood():
    """Conditional laws, impossible strings and the order-1 Markov check"""
    print("=" * 60)
    print("TEST 4: Conditioning and likelihood")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    single = _process(1)
    law = stats.conditional_next(single, "E")
    assert law["E"] < 1e-12 and abs(law["I"] - 1) < 1e-12
    try:
        stats.conditional_next(single, "EE")
        assert False, "zero-probability history accepted"
    except ConditioningError:
        pass
    print("✓ After E the single site must inject; history EE cannot be conditioned on")

    impossible = stats.log_likelihood(single, "EIEE")
    assert impossible.impossible and impossible.impossible_at == 4
    assert impossible.log_likelihood == float("-inf")
    possible = stats.log_likelihood(single, "EIEI")
    assert abs(possible.log_likelihood - math.log(0.5)) < 1e-12
    print("✓ ln P(EIEI) = ln 1/2; EIEE impossible at step 4")

    two_site = _process(2)
    value = stats.log_likelihood(two_site, "EIIE").log_likelihood
    assert abs(value - math.log(stats.sequence_probability(two_site, "EIIE"))) < 1e-10
    print("✓ Stepwise likelihood matches the direct sequence probability")

    assert stats.markov_order_check(single) < 1e-12
    assert stats.hmm_check(single)
    print("✓ Single site is an order-1 Markov, classical process")

    try:
        stats.sequence_probability(single, "EX")
        assert False, "unknown symbol accepted"
    except UnknownSymbolError:
        pass
    print("✓ Unknown symbols rejected")


def test_enumeration_cap():
    """|alphabet|^N beyond the cap is refused"""
    print("=" * 60)
    print("TEST 5: Enumeration cap")
    print("=" * 60)

    capped = JumpStatistics(enumeration_cap=16, verbose=False)
    process = _process(2)
    assert len(capped.full_distribution(process, 4).table) == 16
    try:
        capped.full_distribution(process, 5)
        assert False, "cap not enforced"
    except EnumerationCapError:
        pass
    print("✓ 2^4 allowed, 2^5 refused at cap 16")

    threaded = JumpStatistics(threads=4, verbose=False)
    serial = JumpStatistics(threads=1, verbose=False)
    assert np.allclose(threaded.full_distribution(process, 10).as_vector(),
                       serial.full_distribution(process, 10).as_vector())
    print("✓ Threaded enumeration keeps lexicographic order")


def test_memory_across_lengths():
    """I(k1 : k2) falls with chain length and ignores gamma for L <= 2"""
    print("=" * 60)
    print("TEST 6: Mutual information across chain lengths")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    values = [stats.mutual_information(_process(length), 2) for length in range(1, 6)]
    assert abs(values[0] - math.log(2)) < 1e-10
    assert all(a > b for a, b in zip(values, values[1:])), values
    print(f"✓ MI for L = 1..5: {np.round(values, 4).tolist()}")

    for length in (1, 2):
        sweep = [stats.mutual_information(_process(length, gamma=g), 2) for g in (0.5, 1, 2)]
        assert max(sweep) - min(sweep) < 1e-9, (length, sweep)
    sweep = [stats.mutual_information(_process(3, gamma=g), 2) for g in (0.5, 1, 2)]
    assert max(sweep) - min(sweep) > 1e-4, sweep
    print(f"✓ Independent of gamma for L = 1, 2; L = 3 spread {max(sweep) - min(sweep):.3e}")


def test_chain_rule_marginals():
    """Summing P(k1..kN) over k_N gives P(k1..k_N-1)"""
    print("=" * 60)
    print("TEST 7: Marginalisation of joint laws")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    process = _process(3, kappa=0.5)
    a = len(process.alphabet)
    previous = stats.full_distribution(process, 2)
    for n in range(3, 7):
        current = stats.full_distribution(process, n)
        summed = current.as_vector().reshape(-1, a).sum(axis=1)
        assert np.allclose(summed, previous.as_vector(), atol=1e-12), n
        previous = current
    print("✓ XY L=3: orders 3..6 marginalise onto the order below")


def test_likelihood_ranking():
    """Two-site strings are likelier under the two-site model than the single-site one"""
    print("=" * 60)
    print("TEST 8: Likelihood ranking")
    print("=" * 60)

    stats = JumpStatistics(verbose=False)
    sampler = TrajectorySampler(threads=1, verbose=False)
    single, two_site = _process(1), _process(2)
    wins = 0
    for seed in range(100):
        symbols = sampler.simulate(two_site, 200, seed=seed, store_states=False).symbols
        own = stats.log_likelihood(two_site, symbols)
        other = stats.log_likelihood(single, symbols)
        assert not own.impossible
        wins += own.log_likelihood > other.log_likelihood
    assert wins >= 99
    print(f"✓ Two-site model preferred in {wins}/100 strings of length 200")


def main():
    """Run all tests"""
    print("\n" + "=" * 60)
    print("  JUMP STATISTICS - TESTS")
    print("=" * 60 + "\n")

    try:
        test_single_site_laws()
        test_two_site_distribution()
        test_two_point_and_memory()
        test_conditioning_and_likelihood()
        test_enumeration_cap()
        test_memory_across_lengths()
        test_chain_rule_marginals()
        test_likelihood_ranking()

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
