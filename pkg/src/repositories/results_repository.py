"""
Results Repository - CSV, DOT, text and JSON outputs of analysis runs
All floats are written with CSV_SIGNIFICANT_DIGITS significant digits.
"""
import csv
import json
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from src.config.analysis_config import CSV_SIGNIFICANT_DIGITS
from src.models.results import ClusterModel, JointDistribution, PatternGraph, QualityPoint, TrajectoryRecord
from src.services.graph_export import graph_to_dot


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, Fraction)):
        return f"{float(value):.{CSV_SIGNIFICANT_DIGITS}g}"
    return str(value)


class ResultsRepository:
    """Writes run outputs below one output directory"""

    def __init__(self, output_dir: str = "results"):
        self.output_dir = output_dir

    def path(self, name: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, name)

    # ========== Generic writers ==========

    def save_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        full = self.path(name)
        with open(full, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        return full

    def save_lines(self, name: str, lines: Iterable[str]) -> str:
        full = self.path(name)
        with open(full, "w", encoding="utf-8") as f:
            for line in lines:
                f.write(f"{line}\n")
        return full

    def save_json(self, name: str, data: Dict[str, Any]) -> str:
        full = self.path(name)
        with open(full, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=format_value)
            f.write("\n")
        return full

    def save_dot(self, name: str, graph: PatternGraph, title: str = "pattern") -> str:
        full = self.path(name)
        with open(full, "w", encoding="utf-8") as f:
            f.writelines(graph_to_dot(graph, title))
        return full

    # ========== Statistics ==========

    def save_single_outcome(self, name: str, law: Dict[str, float], current: float = None) -> str:
        rows: List[List[Any]] = [[symbol, p] for symbol, p in sorted(law.items())]
        if current is not None:
            rows.append(["current", current])
        return self.save_csv(name, ["symbol", "probability"], rows)

    def save_distribution(self, name: str, distribution: JointDistribution) -> str:
        return self.save_csv(name, ["sequence", "probability"], distribution.to_rows())

    def save_two_point(self, name: str, rows: Sequence) -> str:
        """Rows of (N, k1, kN, direct, spectral)"""
        return self.save_csv(
            name, ["n", "first", "last", "direct", "spectral", "difference"],
            [[n, a, b, direct, spectral, abs(direct - spectral)] for n, a, b, direct, spectral in rows],
        )

    def save_mutual_information(self, name: str, sweep: Sequence) -> str:
        return self.save_csv(name, ["n", "mutual_information"], sweep)

    # ========== Trajectories and patterns ==========

    def save_symbols(self, name: str, records: Sequence[TrajectoryRecord]) -> str:
        return self.save_lines(name, (r.symbol_string for r in records))

    def save_label_series(self, name: str, series: Sequence[Sequence[int]]) -> str:
        rows = [[t, step, label] for t, labels in enumerate(series) for step, label in enumerate(labels)]
        return self.save_csv(name, ["trajectory", "step", "label"], rows)

    # ========== Clustering ==========

    def save_assignment(self, name: str, model: ClusterModel) -> str:
        return self.save_csv(name, ["state_index", "cluster_id"], enumerate(model.assignment.tolist()))

    def save_matrix_csv(self, name: str, matrix: np.ndarray) -> str:
        matrix = np.asarray(matrix, dtype=float)
        header = ["row"] + [str(j) for j in range(matrix.shape[1])]
        return self.save_csv(name, header, ([i] + list(row) for i, row in enumerate(matrix)))

    def save_quality(self, name: str, points: Sequence[QualityPoint]) -> str:
        return self.save_csv(
            name, ["n_clusters", "max_intra_distance", "max_diameter"],
            [[p.n_clusters, p.max_intra_distance, p.max_diameter] for p in points],
        )
