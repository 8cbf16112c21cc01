"""
Jump Statistics Service
Multi-point channel-sequence probabilities P(k1..kN) = tr{M_kN ... M_k1 rho},
two-point laws with their spectral decomposition, mutual information,
conditional next-symbol laws and string log-likelihoods.

All evaluations are superoperator-vector products; product superoperators are
never formed. Exact processes are evaluated through their float view.
"""
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from src.algebra.dense import is_density, trace_functional, vectorize
from src.config.analysis_config import (
    ENUMERATION_CAP,
    MAX_THREADS,
    PROB_CLAMP_TOL,
    VERBOSE_LOGGING,
    ZERO_PROBABILITY_TOL,
)
from src.models.errors import (
    ConditioningError,
    ConfigError,
    EnumerationCapError,
    NumericError,
    UnsupportedModelError,
)
from src.models.process import ChannelProcess
from src.models.results import JointDistribution, LikelihoodResult

# Below this many tuples the enumeration stays on the calling thread
_PARALLEL_MIN_TUPLES = 1024


def expand_tuples(maps: Sequence[np.ndarray], block: np.ndarray, levels: int) -> np.ndarray:
    """
    Apply every map to every column, `levels` times

    Columns come out in lexicographic tuple order with the first-applied
    symbol most significant: column i*|A| + k holds M_k applied to column i.
    """
    for _ in range(levels):
        block = np.stack([m @ block for m in maps], axis=2).reshape(block.shape[0], -1)
    return block


def check_enumeration(alphabet_size: int, n: int, cap: int):
    count = alphabet_size ** n
    if count > cap:
        raise EnumerationCapError(
            f"{alphabet_size}^{n} = {count} tuples exceeds the enumeration cap {cap}; "
            "estimate the distribution by sampling trajectories instead"
        )
    return count


def clamp_probabilities(values: np.ndarray, diagnostics: Dict = None, tol: float = PROB_CLAMP_TOL) -> np.ndarray:
    """
    Clamp floating negativity in [-tol, 0) to zero

    Raises:
        NumericError: some value is below -tol
    """
    values = np.real(np.asarray(values))
    raw_min = float(np.min(values)) if values.size else 0.0
    if raw_min < -tol:
        raise NumericError(f"Negative probability {raw_min:.3e} beyond clamp tolerance {tol:.1e}", residual=raw_min)
    negative = values < 0
    if diagnostics is not None:
        diagnostics["raw_min"] = raw_min
        diagnostics["clamped"] = int(np.count_nonzero(negative))
    return np.where(negative, 0.0, values)


class JumpStatistics:
    """
    Statistics of the symbol process emitted by a ChannelProcess

    Usage:
        stats = JumpStatistics()
        dist = stats.full_distribution(process, 2)
    """

    def __init__(self, enumeration_cap: int = ENUMERATION_CAP, threads: int = MAX_THREADS, verbose: bool = None):
        self.enumeration_cap = enumeration_cap
        self.threads = max(1, int(threads))
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose
        # id(float process) -> (process, eigenvalues, left factors, right factors)
        self._spectral_cache: Dict[int, tuple] = {}

    # ========== Helpers ==========

    def _initial_vector(self, process: ChannelProcess, initial=None) -> np.ndarray:
        if initial is None:
            state = process.jss
        elif hasattr(initial, "to_numpy"):
            state = initial.to_numpy()
        else:
            state = np.asarray(initial, dtype=complex)
        if state.shape != (process.dim, process.dim):
            raise ConfigError(f"Initial state has shape {state.shape}, expected {(process.dim, process.dim)}")
        if initial is not None and not is_density(state):
            raise ConfigError("Initial state is not a density matrix")
        return vectorize(state)

    @staticmethod
    def _clamp(value: complex) -> float:
        value = float(np.real(value))
        if value < 0:
            if value < -PROB_CLAMP_TOL:
                raise NumericError(f"Negative probability {value:.3e}", residual=value)
            return 0.0
        return value

    # ========== Sequence probabilities ==========

    def sequence_probability(self, process: ChannelProcess, sequence, initial=None) -> float:
        """tr{M_kN ... M_k1 rho} for a nonempty symbol sequence (default rho = pi)"""
        fp = process.to_float()
        symbols = fp.model.check_symbols(sequence)
        if not symbols:
            raise ConfigError("Sequence must be nonempty")
        vector = self._initial_vector(fp, initial)
        for symbol in symbols:
            vector = fp.channel_matrix(symbol) @ vector
        return self._clamp(trace_functional(fp.dim) @ vector)

    def full_distribution(self, process: ChannelProcess, n: int, initial=None) -> JointDistribution:
        """
        P(k1..kN) for every tuple in lexicographic order

        Raises:
            EnumerationCapError: |alphabet|^N exceeds the cap
        """
        if n < 1:
            raise ConfigError(f"Order must be >= 1, got {n}")
        fp = process.to_float()
        alphabet = fp.alphabet
        count = check_enumeration(len(alphabet), n, self.enumeration_cap)
        maps = [fp.channel_matrix(k) for k in alphabet]
        start = self._initial_vector(fp, initial)[:, None]

        if self.threads > 1 and count >= _PARALLEL_MIN_TUPLES and n >= 2:
            # Split the tuple space on a prefix level; chunks are contiguous so order is preserved
            split = 1
            while len(alphabet) ** split < self.threads and split < n - 1:
                split += 1
            prefixes = expand_tuples(maps, start, split)
            chunks = np.array_split(np.arange(prefixes.shape[1]), min(self.threads, prefixes.shape[1]))
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                parts = list(executor.map(lambda idx: expand_tuples(maps, prefixes[:, idx], n - split), chunks))
            block = np.hstack(parts)
        else:
            block = expand_tuples(maps, start, n)

        diagnostics: Dict = {}
        probabilities = clamp_probabilities(trace_functional(fp.dim) @ block, diagnostics)
        table = {t: float(p) for t, p in zip(product(alphabet, repeat=n), probabilities)}
        if self.verbose:
            print(f"📊 Order-{n} distribution over {count} tuples (sum={sum(table.values()):.12g})")
        return JointDistribution(order=n, alphabet=list(alphabet), table=table, diagnostics=diagnostics)

    def single_outcome(self, process: ChannelProcess, symbol: str) -> float:
        """P(k) = tr{J_k rho_ss} / K"""
        fp = process.to_float()
        fp.model.check_symbols([symbol])
        weight = trace_functional(fp.dim) @ fp.jump_matrix(symbol) @ vectorize(fp.steady_state)
        return self._clamp(weight / fp.activity)

    def single_outcome_law(self, process: ChannelProcess) -> Dict[str, float]:
        return {k: self.single_outcome(process, k) for k in process.alphabet}

    def current(self, process: ChannelProcess, symbol: str = "E") -> float:
        """Steady-state rate of `symbol` jumps, K * P(symbol) = tr{J_symbol rho_ss}"""
        if process.model.chain is None:
            raise UnsupportedModelError("The excitation current is defined for chain models")
        fp = process.to_float()
        return fp.activity * self.single_outcome(fp, symbol)

    # ========== Two-point laws ==========

    def two_point(self, process: ChannelProcess, first: str, last: str, n: int) -> float:
        """P(k1, kN) = tr{M_kN M^(N-2) M_k1 pi} by repeated multiplication"""
        if n < 2:
            raise ConfigError(f"Two-point law needs N >= 2, got {n}")
        fp = process.to_float()
        fp.model.check_symbols([first, last])
        total = fp.total_map.matrix
        vector = fp.channel_matrix(first) @ vectorize(fp.jss)
        for _ in range(n - 2):
            vector = total @ vector
        return self._clamp(trace_functional(fp.dim) @ fp.channel_matrix(last) @ vector)

    def _spectral_factors(self, fp: ChannelProcess):
        key = id(fp)
        cached = self._spectral_cache.get(key)
        if cached is not None and cached[0] is fp:
            return cached[1:]
        spectrum = fp.spectrum
        tf = trace_functional(fp.dim)
        pi_vec = vectorize(fp.jss)
        # left[k][j] = <<v_j|M_k pi>>, right[k][j] = <<1|M_k|u_j>>
        left = {k: spectrum.left @ (fp.channel_matrix(k) @ pi_vec) for k in fp.alphabet}
        right = {k: tf @ fp.channel_matrix(k) @ spectrum.right for k in fp.alphabet}
        self._spectral_cache[key] = (fp, spectrum.eigenvalues, left, right)
        return spectrum.eigenvalues, left, right

    def spectral_two_point(self, process: ChannelProcess, first: str, last: str, n: int, fallback: bool = True) -> float:
        """
        P(k1)P(kN) + sum over non-stationary j of mu_j^(N-2) <<1|M_kN|u_j>><<v_j|M_k1 pi>>

        Raises:
            UnsupportedModelError: M is defective and fallback is off
        """
        if n < 2:
            raise ConfigError(f"Two-point law needs N >= 2, got {n}")
        fp = process.to_float()
        fp.model.check_symbols([first, last])
        if fp.spectrum is None or not fp.spectrum.diagonalizable:
            if fallback:
                if self.verbose:
                    print("⚠️  M is defective; using repeated multiplication")
                return self.two_point(fp, first, last, n)
            raise UnsupportedModelError("Spectral two-point law needs a diagonalizable M")

        eigenvalues, left, right = self._spectral_factors(fp)
        stationary = fp.spectrum.stationary_index()
        powers = eigenvalues ** (n - 2)
        terms = powers * right[last] * left[first]
        memory = np.sum(terms) - terms[stationary]
        baseline = self.single_outcome(fp, first) * self.single_outcome(fp, last)
        return self._clamp(baseline + memory)

    def two_point_table(self, process: ChannelProcess, n: int) -> List[Tuple[str, str, float, float]]:
        """(k1, kN, direct, spectral) for every pair"""
        rows = []
        for first, last in product(process.alphabet, repeat=2):
            rows.append((
                first,
                last,
                self.two_point(process, first, last, n),
                self.spectral_two_point(process, first, last, n),
            ))
        return rows

    # ========== Memory ==========

    def mutual_information(self, process: ChannelProcess, n: int) -> float:
        """I(k1 : kN) in nats, with 0 ln 0 = 0"""
        fp = process.to_float()
        alphabet = fp.alphabet
        marginal = self.single_outcome_law(fp)
        joint = np.array([self.two_point(fp, a, b, n) for a, b in product(alphabet, repeat=2)])
        independent = np.array([marginal[a] * marginal[b] for a, b in product(alphabet, repeat=2)])
        return float(np.sum(rel_entr(joint, independent)))

    def mutual_information_sweep(self, process: ChannelProcess, n_max: int) -> List[Tuple[int, float]]:
        return [(n, self.mutual_information(process, n)) for n in range(2, n_max + 1)]

    # ========== Conditioning ==========

    def conditional_next(self, process: ChannelProcess, history: Sequence[str], initial=None) -> Dict[str, float]:
        """
        P(k_{N+1} | k1..kN) from the normalized propagated state

        Raises:
            ConditioningError: the history has zero probability
        """
        fp = process.to_float()
        symbols = fp.model.check_symbols(history)
        tf = trace_functional(fp.dim)
        vector = self._initial_vector(fp, initial)
        for step, symbol in enumerate(symbols):
            vector = fp.channel_matrix(symbol) @ vector
            norm = float(np.real(tf @ vector))
            if norm <= ZERO_PROBABILITY_TOL:
                raise ConditioningError(
                    f"History {''.join(symbols)} has zero probability at step {step + 1}"
                )
            vector = vector / norm
        return {k: self._clamp(tf @ fp.channel_matrix(k) @ vector) for k in fp.alphabet}

    def log_likelihood(self, process: ChannelProcess, sequence, initial=None) -> LikelihoodResult:
        """ln P(sequence) accumulated stepwise with per-step renormalization"""
        fp = process.to_float()
        symbols = fp.model.check_symbols(sequence)
        if not symbols:
            raise ConfigError("Sequence must be nonempty")
        tf = trace_functional(fp.dim)
        vector = self._initial_vector(fp, initial)
        total = 0.0
        for step, symbol in enumerate(symbols):
            vector = fp.channel_matrix(symbol) @ vector
            weight = float(np.real(tf @ vector))
            if weight <= ZERO_PROBABILITY_TOL:
                return LikelihoodResult(float("-inf"), True, len(symbols), impossible_at=step + 1)
            total += np.log(weight)
            vector = vector / weight
        return LikelihoodResult(float(total), False, len(symbols))

    def markov_order_check(self, process: ChannelProcess, depth: int = 3) -> float:
        """
        Largest spread of P(next | history) across possible histories sharing their last symbol

        Zero means the symbol process is Markov of order 1 at this depth.
        """
        fp = process.to_float()
        check_enumeration(len(fp.alphabet), depth, self.enumeration_cap)
        by_last: Dict[str, List[np.ndarray]] = {}
        for history in product(fp.alphabet, repeat=depth):
            if self.sequence_probability(fp, history) <= ZERO_PROBABILITY_TOL:
                continue
            law = self.conditional_next(fp, history)
            by_last.setdefault(history[-1], []).append(np.array([law[k] for k in fp.alphabet]))
        spread = 0.0
        for laws in by_last.values():
            stacked = np.vstack(laws)
            spread = max(spread, float(np.max(stacked.max(axis=0) - stacked.min(axis=0))))
        return spread

    def hmm_check(self, process: ChannelProcess, tol: float = 1e-12) -> bool:
        """
        True when every M_k maps populations to nonnegative populations only

        The symbol process is then a classical hidden Markov model over the
        computational basis.
        """
        fp = process.to_float()
        d = fp.dim
        diagonal = np.array([i * d + i for i in range(d)])
        off_diagonal = np.setdiff1d(np.arange(d * d), diagonal)
        for k in fp.alphabet:
            matrix = fp.channel_matrix(k)
            coherences = matrix[np.ix_(off_diagonal, diagonal)]
            populations = matrix[np.ix_(diagonal, diagonal)]
            if np.max(np.abs(coherences), initial=0.0) > tol:
                return False
            if np.max(np.abs(populations.imag), initial=0.0) > tol or np.min(populations.real) < -tol:
                return False
        return True
