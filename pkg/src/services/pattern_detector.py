"""
Pattern Detection Service
Exact-arithmetic search for closed patterns, renewal structure and recurring
states of the post-jump dynamics.

States are Gaussian-rational density matrices, so two post-jump states share
a label only when every entry is identical. Trajectories are sampled with
float-converted weights (one uniform draw per step) while the states
themselves are propagated exactly.
"""
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.algebra.exact_matrix import ExactMatrix, exact_rank
from src.config.analysis_config import (
    CLOSURE_ATTEMPTS,
    DENOMINATOR_BIT_BUDGET,
    MAX_STATES,
    MAX_THREADS,
    RECUR_FRACTION,
    RECUR_STEPS,
    RECUR_TRIALS,
    TOL_MATCH,
    TOL_RANK,
    VERBOSE_LOGGING,
)
from src.models.errors import ConfigError, DarkSubspaceError, PatternClosureError, UnsupportedModelError
from src.models.process import ChannelProcess
from src.models.results import (
    ClassificationResult,
    PatternClassification,
    PatternEvidence,
    PatternGraph,
    RenewalResult,
)
from src.repositories.state_repository import LabeledStateStore
from src.services.trajectory_sampler import TrajectorySampler


def _first_repeat(labels: Sequence[int]) -> Optional[int]:
    """Step at which some label is seen for the second time"""
    seen = set()
    for step, label in enumerate(labels):
        if label in seen:
            return step
        seen.add(label)
    return None


class _ExactKernel:
    """Exact successor computation for one process"""

    def __init__(self, process: ChannelProcess):
        if not process.is_exact:
            raise UnsupportedModelError("Exact pattern detection needs a model built in the exact field")
        self.dim = process.dim
        self.alphabet = process.alphabet
        self.maps = [process.channel_matrix(k) for k in self.alphabet]

    def branches(self, state: ExactMatrix) -> List[Tuple[int, object, Optional[ExactMatrix]]]:
        """(symbol index, exact weight, normalized successor or None) per symbol"""
        vector = state.vectorize()
        out = []
        for index, matrix in enumerate(self.maps):
            image = matrix.apply(vector)
            weight = image.vector_trace(self.dim)
            if weight.is_zero():
                out.append((index, weight.re, None))
            else:
                out.append((index, weight.re, (image / weight).unvectorize(self.dim)))
        return out


class PatternDetector:
    """
    Closed-pattern, renewal and recurrence analysis

    Usage:
        detector = PatternDetector()
        result = detector.classify_recurrence(exact_process, seed=1)
    """

    def __init__(
        self,
        max_states: int = MAX_STATES,
        bit_budget: int = DENOMINATOR_BIT_BUDGET,
        recur_fraction: float = RECUR_FRACTION,
        recur_trials: int = RECUR_TRIALS,
        recur_steps: int = RECUR_STEPS,
        closure_attempts: int = CLOSURE_ATTEMPTS,
        threads: int = MAX_THREADS,
        verbose: bool = None,
    ):
        self.max_states = max_states
        self.bit_budget = bit_budget
        self.recur_fraction = recur_fraction
        self.recur_trials = recur_trials
        self.recur_steps = recur_steps
        self.closure_attempts = closure_attempts
        self.threads = max(1, int(threads))
        self.verbose = VERBOSE_LOGGING if verbose is None else verbose

    # ========== Exact propagation ==========

    def propagate(self, process: ChannelProcess, state: ExactMatrix, symbols: Sequence[str]) -> List[ExactMatrix]:
        """
        Normalized exact post-jump states along a symbol path (initial state first)

        Raises:
            DarkSubspaceError: a symbol on the path has zero probability
        """
        kernel = _ExactKernel(process)
        process.model.check_symbols(symbols)
        states = [state]
        for symbol in symbols:
            index = kernel.alphabet.index(symbol)
            _, _, successor = kernel.branches(states[-1])[index]
            if successor is None:
                raise DarkSubspaceError(f"Symbol {symbol} has zero probability after {len(states) - 1} steps")
            states.append(successor)
        return states

    def _run_exact(self, kernel: _ExactKernel, start: ExactMatrix, steps: int, seed) -> Tuple[LabeledStateStore, List[int], bool, Dict]:
        rng = np.random.default_rng(seed)
        store = LabeledStateStore(exact=True)
        series = [store.record_visit(start)]
        state = start
        truncated = False
        max_bits = 0
        for _ in range(steps):
            branches = kernel.branches(state)
            weights = np.array([float(w) for _, w, _ in branches])
            total = weights.sum()
            if total <= 0:
                raise DarkSubspaceError("All exact jump weights vanish")
            u = rng.random()
            index = min(int(np.searchsorted(np.cumsum(weights), u * total, side="right")), len(weights) - 1)
            while branches[index][2] is None:
                index -= 1
            state = branches[index][2]
            max_bits = max(max_bits, state.denominator_bits())
            series.append(store.record_visit(state))
            if state.denominator_bits() > self.bit_budget:
                truncated = True
                break
        return store, series, truncated, {"max_denominator_bits": max_bits}

    def detect_pattern(
        self,
        process: ChannelProcess,
        max_steps: int = None,
        trajectories: int = None,
        seed=None,
        initial: ExactMatrix = None,
    ) -> PatternEvidence:
        """
        Run the exact post-jump dynamics from pi and label every visited state

        Each trajectory keeps its own store; the stores are merged afterwards
        by replaying trajectories in index order, so global labels do not
        depend on thread scheduling. Label series include the initial state
        at step 0.
        """
        max_steps = self.recur_steps if max_steps is None else max_steps
        trajectories = self.recur_trials if trajectories is None else trajectories
        if max_steps < 1 or trajectories < 1:
            raise ConfigError("max_steps and trajectories must be >= 1")
        kernel = _ExactKernel(process)
        start = initial if initial is not None else process.jss
        children = np.random.SeedSequence(seed).spawn(trajectories)

        def run(index: int):
            return self._run_exact(kernel, start, max_steps, children[index])

        if self.threads > 1 and trajectories > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                runs = list(executor.map(run, range(trajectories)))
        else:
            runs = [run(i) for i in range(trajectories)]

        store, series = LabeledStateStore.merge([r[0] for r in runs], [r[1] for r in runs])
        first_repeat = [_first_repeat(labels) for labels in series]
        truncated = [r[2] for r in runs]
        evidence = PatternEvidence(
            store=store,
            label_series=series,
            first_repeat=first_repeat,
            truncated=truncated,
            seeds=[(seed, i) for i in range(trajectories)],
            diagnostics={
                "max_denominator_bits": max(r[3]["max_denominator_bits"] for r in runs),
                "truncated_trajectories": sum(truncated),
            },
        )
        if any(truncated):
            print(f"⚠️  {sum(truncated)} trajectories stopped at the {self.bit_budget}-bit denominator budget")
        if self.verbose:
            print(f"📊 {len(store)} distinct exact states over {trajectories} x {max_steps} steps")
        return evidence

    def label_series_approximate(
        self,
        process: ChannelProcess,
        steps: int,
        seed=None,
        tol_match: float = TOL_MATCH,
        trajectories: int = 1,
        initial=None,
    ) -> PatternEvidence:
        """Label series of float trajectories, matching states by trace distance <= tol_match"""
        sampler = TrajectorySampler(threads=1)
        children = np.random.SeedSequence(seed).spawn(trajectories)
        store = LabeledStateStore(exact=False, tol_match=tol_match)
        series = []
        for child in children:
            record = sampler.simulate(process, steps, seed=child, initial=initial)
            series.append([store.record_visit(state) for state in record.states])
        first_repeat = [_first_repeat(labels) for labels in series]
        return PatternEvidence(
            store=store,
            label_series=series,
            first_repeat=first_repeat,
            truncated=[False] * trajectories,
            seeds=[(seed, i) for i in range(trajectories)],
            diagnostics={"tol_match": tol_match},
        )

    # ========== Closure ==========

    def close_pattern(
        self,
        process: ChannelProcess,
        seed_state: ExactMatrix,
        max_states: int = None,
        strict: bool = False,
    ) -> PatternGraph:
        """
        Breadth-first closure of the state set reachable from seed_state

        Every discovered state is expanded along each symbol with nonzero exact
        probability. If more than max_states states appear, expansion stops and
        the partial graph is returned with the unexpanded labels as frontier.

        Raises:
            PatternClosureError: strict mode and the state budget was exceeded
        """
        max_states = self.max_states if max_states is None else max_states
        kernel = _ExactKernel(process)
        store = LabeledStateStore(exact=True)
        graph = PatternGraph(exact=True)
        root, _ = store.get_or_create(seed_state)
        graph.add_node(root, seed_state)
        queue = deque([root])
        overflow = False

        while queue:
            if len(store) > max_states:
                overflow = True
                break
            label = queue.popleft()
            state = store.get_by_label(label)
            if state.denominator_bits() > self.bit_budget:
                overflow = True
                queue.appendleft(label)
                break
            for index, weight, successor in kernel.branches(state):
                if successor is None:
                    continue
                target, created = store.get_or_create(successor)
                if created:
                    graph.add_node(target, successor)
                    queue.append(target)
                graph.add_edge(label, kernel.alphabet[index], target, weight)

        graph.frontier = sorted(queue)
        if overflow or graph.frontier:
            graph.classification = PatternClassification.OPEN
            graph.diagnostics["frontier_size"] = len(graph.frontier)
            message = (f"Pattern closure exceeded {max_states} states "
                       f"({len(store)} discovered, {len(graph.frontier)} on the frontier)")
            if self.verbose:
                print(f"⚠️  {message}")
            if strict:
                raise PatternClosureError(message, graph=graph)
        else:
            graph.classification = PatternClassification.CLOSED
            if self.verbose:
                print(f"✓ Closed pattern with {graph.node_count} states and {graph.edge_count} edges")
        return graph

    # ========== Renewal ==========

    def is_renewal(self, process: ChannelProcess) -> RenewalResult:
        """
        Renewal iff every M_k has rank 1; the normalized image is then the reset state
        """
        ranks: Dict[str, int] = {}
        resets: Dict[str, object] = {}
        for label in process.alphabet:
            matrix = process.channel_matrix(label)
            if process.is_exact:
                ranks[label] = exact_rank(matrix, stop_at=2)
            else:
                singular = np.linalg.svd(matrix, compute_uv=False)
                ranks[label] = int(np.sum(singular > TOL_RANK * max(singular[0], 1.0)))
            if ranks[label] != 1:
                continue
            if process.is_exact:
                column = matrix.column(matrix.nonzero_columns()[0])
                state = column.unvectorize(process.dim)
                resets[label] = state / state.trace()
            else:
                column = matrix[:, int(np.argmax(np.linalg.norm(matrix, axis=0)))]
                state = column.reshape((process.dim, process.dim), order="F")
                resets[label] = state / np.trace(state)
        renewal = all(rank == 1 for rank in ranks.values())
        return RenewalResult(renewal=renewal, reset_states=resets if renewal else {}, ranks=ranks)

    def renewal_graph(self, process: ChannelProcess, renewal: RenewalResult) -> PatternGraph:
        """One node per reset state; edge k from every node points to the node of sigma_k"""
        graph = PatternGraph(exact=process.is_exact, classification=PatternClassification.RENEWAL)
        labels = {}
        for i, symbol in enumerate(process.alphabet, start=1):
            labels[symbol] = i
            graph.add_node(i, renewal.reset_states[symbol])
        fp = process.to_float()
        for symbol, source in labels.items():
            state = renewal.reset_states[symbol]
            for target_symbol in process.alphabet:
                if process.is_exact:
                    weight = process.channel_matrix(target_symbol).apply(state.vectorize()).vector_trace(process.dim).re
                    if weight == 0:
                        continue
                else:
                    weight = float(np.real(np.trace(
                        (fp.channel_matrix(target_symbol) @ state.reshape(-1, order="F")).reshape(state.shape, order="F")
                    )))
                    if weight <= 0:
                        continue
                graph.add_edge(source, target_symbol, labels[target_symbol], weight)
        return graph

    # ========== Classification ==========

    def classify_recurrence(
        self,
        process: ChannelProcess,
        trials: int = None,
        steps: int = None,
        seed=None,
    ) -> ClassificationResult:
        """
        renewal > closed > recurring > open

        `recurring` means some exact label is revisited within `steps` in at
        least recur_fraction of the trials; it is a finite-run surrogate for
        recurrence with probability one.
        """
        renewal = self.is_renewal(process)
        if renewal.renewal:
            graph = self.renewal_graph(process, renewal)
            if self.verbose:
                print(f"✓ {process.model.name}: renewal process with {graph.node_count} reset states")
            return ClassificationResult(PatternClassification.RENEWAL, graph=graph, renewal=renewal, revisit_fraction=1.0)

        evidence = self.detect_pattern(process, steps, trials, seed)
        fraction = evidence.revisit_fraction()
        partial = None
        notes = []
        explored = set()
        for label, _ in evidence.repeated_labels()[: self.closure_attempts]:
            seed_state = evidence.store.get_by_label(label)
            # a seed inside an earlier partial graph can only re-walk it
            if seed_state in explored:
                notes.append(f"label {label} already explored by an earlier closure attempt")
                continue
            graph = self.close_pattern(process, seed_state)
            explored.update(node.state for node in graph.nodes.values())
            if graph.classification == PatternClassification.CLOSED:
                self._attach_visits(graph, evidence)
                return ClassificationResult(
                    PatternClassification.CLOSED, graph=graph, evidence=evidence,
                    renewal=renewal, revisit_fraction=fraction,
                )
            partial = graph
            notes.append(f"closure from label {label} stopped with {len(graph.frontier)} frontier states")

        if fraction >= self.recur_fraction:
            classification = PatternClassification.RECURRING
        else:
            classification = PatternClassification.OPEN
        if partial is not None:
            partial.classification = classification
            self._attach_visits(partial, evidence)
        notes.append(f"revisit fraction {fraction:.3f} (threshold {self.recur_fraction})")
        return ClassificationResult(
            classification, graph=partial, evidence=evidence,
            renewal=renewal, revisit_fraction=fraction, notes=notes,
        )

    @staticmethod
    def _attach_visits(graph: PatternGraph, evidence: PatternEvidence):
        for node in graph.nodes.values():
            label = evidence.store.find(node.state)
            node.visits = evidence.store.visits(label) if label is not None else 0
