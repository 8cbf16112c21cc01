"""
Command implementations behind the jump-statistics CLI

Each command takes the resolved RunConfig plus its parameter dict, writes its
files through ResultsRepository and returns a summary dict.
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.config.analysis_config import (
    COND_MAX,
    ENUMERATION_CAP,
    TOL_MATCH,
    TOL_RANK,
    get_analysis_profile,
)
from src.config.run_config import RunConfig
from src.models.errors import ConfigError, UnsupportedModelError
from src.models.open_system import EXACT, FLOAT
from src.models.process import ChannelProcess
from src.models.results import PatternClassification
from src.repositories.matrix_repository import MatrixRepository
from src.repositories.results_repository import ResultsRepository
from src.services.chain_builder import ChainBuilder, occupation_state
from src.services.channel_engine import ChannelEngine
from src.services.jump_statistics import JumpStatistics
from src.services.pattern_detector import PatternDetector
from src.services.state_clustering import StateClusterer
from src.services.trajectory_sampler import TrajectorySampler


def _param(params: Dict[str, Any], name: str, default):
    value = params.get(name)
    return default if value is None else value


def build_process(config: RunConfig, model_section: Dict[str, Any] = None) -> ChannelProcess:
    builder = ChainBuilder(field=config.mode, base_dir=config.base_dir)
    model = builder.build(model_section or config.model)
    engine = ChannelEngine(
        tol_rank=config.tolerance("tol_rank", TOL_RANK),
        cond_max=config.tolerance("cond_max", COND_MAX),
    )
    return engine.build_channel_maps(model)


def _initial_state(process: ChannelProcess, initial: Optional[str]):
    """None/'pi' for the jump steady state, otherwise an occupation string"""
    if initial is None or str(initial).lower() == "pi":
        return None
    return occupation_state(str(initial), EXACT if process.is_exact else FLOAT)


def _parse_int_list(raw, name: str) -> List[int]:
    if isinstance(raw, (list, tuple)):
        values = raw
    else:
        values = [part for part in str(raw).split(",") if part.strip()]
    try:
        parsed = [int(v) for v in values]
    except ValueError:
        raise ConfigError(f"{name} must be a comma-separated list of integers, got {raw!r}")
    if not parsed:
        raise ConfigError(f"{name} must not be empty")
    return parsed


# ==================== stats ====================

def cmd_stats(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Single-outcome law, distributions up to --order, two-point comparison and MI sweep"""
    params = config.command("stats", params)
    order = int(_param(params, "order", 2))
    mi_max = int(_param(params, "mi_max", 10))
    if order < 1 or mi_max < 2:
        raise ConfigError("order must be >= 1 and mi_max >= 2")

    process = build_process(config)
    stats = JumpStatistics(
        enumeration_cap=int(config.tolerance("enumeration_cap", ENUMERATION_CAP)),
        threads=config.threads,
    )
    results = ResultsRepository(config.output_dir)
    files = []

    law = stats.single_outcome_law(process)
    current = stats.current(process) if process.model.chain is not None else None
    files.append(results.save_single_outcome("single_outcome.csv", law, current))

    for n in range(1, order + 1):
        files.append(results.save_distribution(f"distribution_N{n}.csv", stats.full_distribution(process, n)))

    two_point_rows = []
    for n in range(2, mi_max + 1):
        for first, last, direct, spectral in stats.two_point_table(process, n):
            two_point_rows.append((n, first, last, direct, spectral))
    files.append(results.save_two_point("two_point.csv", two_point_rows))

    sweep = stats.mutual_information_sweep(process, mi_max)
    files.append(results.save_mutual_information("mutual_information.csv", sweep))

    print(f"📊 {process.model.name}: K = {float(complex(process.activity).real):.12g}")
    for symbol, p in sorted(law.items()):
        print(f"   P({symbol}) = {p:.12g}")
    if current is not None:
        print(f"   current = {current:.12g}")
    print(f"   I(k1:k2) = {sweep[0][1]:.12g}")
    return {"files": files, "law": law, "current": current, "mutual_information": sweep}


# ==================== simulate ====================

def cmd_simulate(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Symbol streams (one line per trajectory) and optional state dumps"""
    params = config.command("simulate", params)
    seed = config.require_seed()
    steps = int(_param(params, "steps", 1000))
    trajectories = int(_param(params, "trajectories", 1))
    burn_in = int(_param(params, "burn_in", 0))
    dump_states = bool(_param(params, "dump_states", False))

    process = build_process(config)
    initial = _initial_state(process, params.get("initial"))
    sampler = TrajectorySampler(threads=config.threads)
    if trajectories == 1:
        records = [sampler.simulate(process, steps, seed=seed, burn_in=burn_in, initial=initial, store_states=dump_states)]
    else:
        records = sampler.simulate_ensemble(
            process, trajectories, steps, seed, burn_in=burn_in, initial=initial, store_states=dump_states,
        )

    results = ResultsRepository(config.output_dir)
    files = [results.save_symbols("symbols.txt", records)]
    if dump_states:
        matrices = MatrixRepository(config.output_dir)
        for index, record in enumerate(records):
            files.append(matrices.save_states(f"states_{index}.json", record.states))

    clamped = sum(r.diagnostics.get("clamped_steps", 0) for r in records)
    if clamped:
        print(f"⚠️  {clamped} steps clamped small negative weights")
    print(f"✓ {trajectories} trajectories x {steps} jumps written to {files[0]}")
    return {"files": files, "records": records}


# ==================== patterns ====================

def cmd_patterns(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Classification report, label series and pattern DOT"""
    params = config.command("patterns", params)
    seed = config.require_seed()
    profile = get_analysis_profile(params.get("profile", "balanced"))
    trials = int(_param(params, "trajectories", profile["recur_trials"]))
    steps = int(_param(params, "steps", profile["recur_steps"]))
    max_states = int(_param(params, "max_states", profile["max_states"]))
    approximate = bool(_param(params, "approximate", False))

    process = build_process(config)
    results = ResultsRepository(config.output_dir)
    detector = PatternDetector(max_states=max_states, threads=config.threads)
    files = []

    if approximate:
        tol_match = float(_param(params, "tol_match", config.tolerance("tol_match", TOL_MATCH)))
        evidence = detector.label_series_approximate(process, steps, seed=seed, tol_match=tol_match, trajectories=trials)
        files.append(results.save_label_series("labels.csv", evidence.label_series))
        report = {
            "classification": "approximate",
            "distinct_labels": evidence.distinct_labels,
            "revisit_fraction": evidence.revisit_fraction(),
            "tol_match": tol_match,
        }
        files.append(results.save_json("patterns.json", report))
        print(f"📊 {process.model.name}: {evidence.distinct_labels} approximate labels (tol {tol_match:g})")
        return {"files": files, "report": report, "evidence": evidence}

    if config.mode != EXACT:
        raise ConfigError("Exact pattern detection needs --mode exact (or use --approximate)")

    result = detector.classify_recurrence(process, trials=trials, steps=steps, seed=seed)
    report = result.to_dict()
    report["model"] = process.model.name
    files.append(results.save_lines("classification.txt", [f"classification: {result.classification.value}"] + result.notes))
    files.append(results.save_json("patterns.json", report))
    if result.evidence is not None:
        files.append(results.save_label_series("labels.csv", result.evidence.label_series))
    if result.graph is not None:
        files.append(results.save_dot("pattern.dot", result.graph, process.model.name))

    print(f"📊 {process.model.name}: classification: {result.classification.value}")
    if result.graph is not None:
        print(f"   graph: {result.graph.node_count} nodes, {result.graph.edge_count} edges")
    if result.classification == PatternClassification.OPEN and result.evidence is not None:
        print(f"   {result.evidence.distinct_labels} distinct exact states, no repeats")
    return {"files": files, "report": report, "result": result}


# ==================== cluster ====================

def cmd_cluster(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Assignments, distance matrices, quality curve and cluster graphs per N_c"""
    params = config.command("cluster", params)
    seed = config.require_seed()
    profile = get_analysis_profile(params.get("profile", "balanced"))
    counts = _parse_int_list(_param(params, "nc", [12, 32]), "nc")
    samples = int(_param(params, "samples", profile["sample_count"]))
    burn_in = int(_param(params, "burn_in", profile["burn_in"]))
    horizon = int(_param(params, "horizon", profile["horizon"]))
    metric = str(_param(params, "metric", "probability"))

    process = build_process(config)
    clusterer = StateClusterer(
        horizon=horizon,
        metric=metric,
        enumeration_cap=int(config.tolerance("enumeration_cap", ENUMERATION_CAP)),
        threads=config.threads,
    )
    initial = _initial_state(process, params.get("initial"))
    record, dendrogram, models, quality = clusterer.run(process, counts, samples, burn_in, seed, initial)

    results = ResultsRepository(config.output_dir)
    files = []
    for model in models:
        tag = f"nc{model.n_clusters}"
        files.append(results.save_assignment(f"assignment_{tag}.csv", model))
        files.append(results.save_matrix_csv(f"distances_{tag}.csv", model.distance_matrix))
        files.append(results.save_dot(f"cluster_{tag}.dot", model.graph, f"{process.model.name}-{tag}"))
    files.append(results.save_quality("quality.csv", quality))
    files.append(results.save_csv(
        "linkage.csv", ["left", "right", "distance", "size"],
        ([int(a), int(b), float(h), int(s)] for a, b, h, s in dendrogram.linkage),
    ))

    for point in quality:
        print(f"📊 N_c = {point.n_clusters}: max D_ii = {point.max_intra_distance:.6g}, "
              f"max diameter = {point.max_diameter:.6g}")
    return {"files": files, "models": models, "quality": quality, "record": record}


# ==================== likelihood ====================

def _candidate_sections(config: RunConfig, raw: Optional[str]) -> List[Tuple[str, Dict[str, Any]]]:
    if not raw:
        return [(str(config.model.get("name") or _model_name(config.model)), config.model)]
    sections = []
    for item in str(raw).split(","):
        item = item.strip()
        if not item:
            continue
        chain, _, length = item.partition(":")
        if not length:
            raise ConfigError(f"Candidates look like 'xx:2', got {item!r}")
        section = {**config.model, "chain": chain.lower(), "L": int(length)}
        if section["chain"] == "xx":
            section["kappa"] = 0
        sections.append((item, section))
    return sections


def _model_name(section: Dict[str, Any]) -> str:
    return f"{section.get('chain', 'custom')}:{section.get('L', '?')}"


def cmd_likelihood(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Log-likelihood of a symbol string under each candidate model, best first"""
    params = config.command("likelihood", params)
    string = params.get("string")
    if not string:
        raise ConfigError("likelihood needs a nonempty symbol string")

    stats = JumpStatistics(threads=config.threads)
    rows = []
    for name, section in _candidate_sections(config, params.get("candidates")):
        process = build_process(config, section)
        initial = _initial_state(process, params.get("initial"))
        result = stats.log_likelihood(process, string, initial=initial)
        rows.append((name, result))
    # most likely first, impossible strings last
    rows.sort(key=lambda item: (item[1].impossible, 0.0 if item[1].impossible else -item[1].log_likelihood, item[0]))

    results = ResultsRepository(config.output_dir)
    path = results.save_csv(
        "likelihood.csv", ["model", "log_likelihood", "impossible", "impossible_at"],
        ([name, r.log_likelihood, r.impossible, r.impossible_at if r.impossible_at is not None else ""] for name, r in rows),
    )
    for name, result in rows:
        if result.impossible:
            print(f"   {name}: impossible (first zero-probability symbol at {result.impossible_at})")
        else:
            print(f"   {name}: ln P = {result.log_likelihood:.12g}")
    return {"files": [path], "ranking": rows}


# ==================== info ====================

def cmd_info(config: RunConfig, params: Dict[str, Any]) -> Dict[str, Any]:
    """Process summary: activity, single-outcome law, current, leading spectrum"""
    params = config.command("info", params)
    process = build_process(config)
    stats = JumpStatistics(threads=config.threads)
    law = stats.single_outcome_law(process)
    try:
        current = stats.current(process)
    except UnsupportedModelError:
        current = None
    spectrum = process.spectrum
    leading = spectrum.eigenvalues[: int(_param(params, "eigenvalues", 6))] if spectrum is not None else np.array([])

    summary = {
        "model": process.model.to_dict(),
        "activity": float(complex(process.activity).real),
        "single_outcome": law,
        "current": current,
        "spectral_radius": spectrum.spectral_radius if spectrum is not None else None,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in leading],
        "diagnostics": process.diagnostics,
    }
    path = ResultsRepository(config.output_dir).save_json("info.json", summary)

    print(f"📊 {process.model.name} ({process.dim}x{process.dim}, {config.mode})")
    print(f"   K = {summary['activity']:.12g}")
    for symbol, p in sorted(law.items()):
        print(f"   P({symbol}) = {p:.12g}")
    if current is not None:
        print(f"   current = {current:.12g}")
    for z in leading:
        print(f"   mu = {z.real:+.6g} {z.imag:+.6g}i  |mu| = {abs(z):.6g}")
    return {"files": [path], "summary": summary}


COMMANDS = {
    "stats": cmd_stats,
    "simulate": cmd_simulate,
    "patterns": cmd_patterns,
    "cluster": cmd_cluster,
    "likelihood": cmd_likelihood,
    "info": cmd_info,
}
