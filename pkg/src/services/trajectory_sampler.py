"""
Trajectory Sampler
Discrete post-jump dynamics: from rho_i the next symbol k is drawn with
probability tr{M_k rho_i} and the state becomes M_k rho_i / tr{M_k rho_i}.

Each step consumes exactly one uniform draw, so a run with burn-in is the
suffix of the same-seed run without it.
"""
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.dense import is_density, trace_functional, unvectorize, vectorize
from src.config.analysis_config import MAX_THREADS, PROB_CLAMP_TOL, VERBOSE_LOGGING
from src.models.errors import ConfigError, DarkSubspaceError, InsufficientDataError, NumericError
from src.models.process import ChannelProcess
from src.models.results import JointDistribution, TrajectoryRecord
from src.services.chain_builder import occupation_state


def resolve_initial(process: ChannelProcess, initial=None) -> np.ndarray:
    """
    Initial density matrix from None/'pi' (jump steady state), an occupation
    string such as '110', or an explicit matrix
    """
    fp = process.to_float()
    if initial is None or (isinstance(initial, str) and initial.lower() == "pi"):
        return np.array(fp.jss, dtype=complex)
    if isinstance(initial, str):
        state = occupation_state(initial)
    elif hasattr(initial, "to_numpy"):
        state = initial.to_numpy()
    else:
        state = np.asarray(initial, dtype=complex)
    if state.shape != (fp.dim, fp.dim):
        raise ConfigError(f"Initial state has shape {state.shape}, expected {(fp.dim, fp.dim)}")
    if not is_density(state):
        raise ConfigError("Initial state is not a density matrix")
    return state


class _StepKernel:
    """Per-process precomputation shared by every step"""

    def __init__(self, process: ChannelProcess):
        fp = process.to_float()
        d = fp.dim
        self.dim = d
        self.alphabet = fp.alphabet
        self.maps = [fp.channel_matrix(k) for k in self.alphabet]
        tf = trace_functional(d)
        # weights tr{M_k rho} = (<<1| M_k) vec(rho)
        self.weight_rows = np.vstack([tf @ m for m in self.maps])
        # vec(A^dagger) = conj(vec(A)[adjoint_perm])
        self.adjoint_perm = np.array([(idx % d) * d + idx // d for idx in range(d * d)])

    def weights(self, vector: np.ndarray) -> Tuple[np.ndarray, bool]:
        raw = np.real(self.weight_rows @ vector)
        if np.min(raw) < -PROB_CLAMP_TOL:
            raise NumericError(f"Negative jump weight {np.min(raw):.3e}", residual=float(np.min(raw)))
        clamped = bool(np.any(raw < 0))
        return np.where(raw < 0, 0.0, raw), clamped

    def advance(self, vector: np.ndarray, u: float) -> Tuple[int, np.ndarray, bool]:
        weights, clamped = self.weights(vector)
        total = float(np.sum(weights))
        if total <= 0:
            raise DarkSubspaceError("All jump weights vanish: the state sits in a dark subspace")
        cumulative = np.cumsum(weights)
        index = int(np.searchsorted(cumulative, u * total, side="right"))
        index = min(index, len(weights) - 1)
        while weights[index] == 0:
            index -= 1
        successor = self.maps[index] @ vector / weights[index]
        successor = 0.5 * (successor + np.conj(successor[self.adjoint_perm]))
        return index, successor, clamped


class TrajectorySampler:
    """
    Seeded simulation of the post-jump process

    Usage:
        sampler = TrajectorySampler()
        record = sampler.simulate(process, steps=1000, seed=7)
    """

    def __init__(self, threads: int = MAX_THREADS, verbose: bool = None):
        self.threads = max(1, int(threads))
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose

    def step(self, process: ChannelProcess, rho: np.ndarray, rng: np.random.Generator) -> Tuple[str, np.ndarray]:
        """
        Sample one symbol and the normalized, re-Hermitized post-jump state

        Raises:
            DarkSubspaceError: every weight tr{M_k rho} is zero
        """
        kernel = _StepKernel(process)
        index, successor, _ = kernel.advance(vectorize(np.asarray(rho, dtype=complex)), rng.random())
        return kernel.alphabet[index], unvectorize(successor, kernel.dim)

    def simulate(
        self,
        process: ChannelProcess,
        steps: int,
        seed=None,
        burn_in: int = 0,
        initial=None,
        store_states: bool = True,
        thin: int = 1,
        validate: bool = False,
    ) -> TrajectoryRecord:
        """
        Run burn_in + steps jumps and keep the last `steps`

        The record is a pure function of (process, steps, seed, burn_in, initial).
        States are stored from the first kept step on (steps + 1 of them when
        thin = 1); with validate every stored state is checked as a density matrix.
        """
        if steps < 1:
            raise ConfigError(f"steps must be >= 1, got {steps}")
        if burn_in < 0 or thin < 1:
            raise ConfigError("burn_in must be >= 0 and thin >= 1")
        kernel = _StepKernel(process)
        rng = np.random.default_rng(seed)
        start = resolve_initial(process, initial)
        vector = vectorize(start)
        clamped_steps = 0

        for _ in range(burn_in):
            _, vector, clamped = kernel.advance(vector, rng.random())
            clamped_steps += clamped

        symbols: List[str] = []
        states: List[np.ndarray] = []

        def keep(i: int, v: np.ndarray):
            if store_states and i % thin == 0:
                state = unvectorize(v, kernel.dim)
                if validate and not is_density(state, tol_psd=1e-9, tol_trace=1e-10):
                    raise NumericError(f"State at kept step {i} is not a density matrix")
                states.append(state)

        keep(0, vector)
        for i in range(steps):
            index, vector, clamped = kernel.advance(vector, rng.random())
            clamped_steps += clamped
            symbols.append(kernel.alphabet[index])
            keep(i + 1, vector)

        if self.verbose:
            print(f"✓ Simulated {steps} jumps (burn-in {burn_in}) for {process.model.name}")
        return TrajectoryRecord(
            seed=seed,
            symbols=symbols,
            states=states,
            initial=start,
            burn_in=burn_in,
            thin=thin,
            diagnostics={"clamped_steps": int(clamped_steps)},
        )

    def simulate_ensemble(
        self,
        process: ChannelProcess,
        n_trajectories: int,
        steps: int,
        master_seed: int,
        burn_in: int = 0,
        initial=None,
        store_states: bool = False,
    ) -> List[TrajectoryRecord]:
        """
        Independent runs seeded by SeedSequence(master_seed).spawn(n)

        Records come back in trajectory-index order whatever the thread count.
        """
        if n_trajectories < 1:
            raise ConfigError(f"n_trajectories must be >= 1, got {n_trajectories}")
        children = np.random.SeedSequence(master_seed).spawn(n_trajectories)
        process.to_float()

        def run(index: int) -> TrajectoryRecord:
            record = self.simulate(
                process, steps, seed=children[index], burn_in=burn_in,
                initial=initial, store_states=store_states,
            )
            record.seed = (master_seed, index)
            return record

        if self.threads > 1 and n_trajectories > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                records = list(executor.map(run, range(n_trajectories)))
        else:
            records = [run(i) for i in range(n_trajectories)]
        if self.verbose:
            print(f"✓ Ensemble of {n_trajectories} trajectories x {steps} steps (master seed {master_seed})")
        return records

    @staticmethod
    def empirical_distribution(
        records: Sequence[TrajectoryRecord],
        n: int,
        alphabet: Optional[Sequence[str]] = None,
    ) -> JointDistribution:
        """
        Sliding-window frequencies of length-n tuples, pooled over records

        Raises:
            InsufficientDataError: no record holds n symbols
        """
        if n < 1:
            raise ConfigError(f"Order must be >= 1, got {n}")
        if alphabet is None:
            alphabet = sorted({s for r in records for s in r.symbols})
        counts: Dict[Tuple[str, ...], int] = {t: 0 for t in product(alphabet, repeat=n)}
        windows = 0
        for record in records:
            symbols = record.symbols
            for i in range(len(symbols) - n + 1):
                key = tuple(symbols[i:i + n])
                counts[key] = counts.get(key, 0) + 1
                windows += 1
        if windows == 0:
            raise InsufficientDataError(f"No record holds {n} symbols")
        table = {t: c / windows for t, c in counts.items()}
        return JointDistribution(order=n, alphabet=list(alphabet), table=table, diagnostics={"windows": windows})
