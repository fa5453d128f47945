"""
Export functionality for experiment results.
Generates the regret CSV and Markdown summaries.
"""

import csv
from io import StringIO
from typing import Optional, Sequence

import numpy as np

CSV_COLUMNS = ("t", "algo", "seed", "round_score", "optimal_score", "round_regret", "cum_regret")


def _num(value: float) -> str:
    return repr(float(value))


class RegretExporter:
    """Exports regret traces (see src.core.harness.RegretTrace) to CSV and Markdown."""

    def __init__(self, traces: Sequence, algorithms: Optional[Sequence[str]] = None):
        self.traces = list(traces)
        self.algorithms = list(algorithms) if algorithms else list(dict.fromkeys(t.algo for t in self.traces))

    # -------------------------------------------------------------------------
    # CSV
    # -------------------------------------------------------------------------

    def to_csv(self) -> str:
        """One row per (trace, round), traces in the given order."""
        output = StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for trace in self.traces:
            for i, score in enumerate(trace.round_scores):
                writer.writerow(
                    [
                        i + 1,
                        trace.algo,
                        trace.seed,
                        _num(score),
                        _num(trace.optimal),
                        _num(trace.round_regret[i]),
                        _num(trace.cumulative[i]),
                    ]
                )
        return output.getvalue()

    # -------------------------------------------------------------------------
    # Summary
    # -------------------------------------------------------------------------

    def summary(self, checkpoints: Sequence[int]) -> dict[str, dict[int, float]]:
        """Mean cumulative regret over seeds at each checkpoint the traces reach."""
        table: dict[str, dict[int, float]] = {}
        for algo in self.algorithms:
            traces = [t for t in self.traces if t.algo == algo]
            row: dict[int, float] = {}
            for c in checkpoints:
                if c < 1 or not traces or any(len(t.cumulative) < c for t in traces):
                    continue
                row[c] = float(np.mean([t.cumulative[c - 1] for t in traces]))
            table[algo] = row
        return table

    def reached_checkpoints(self, checkpoints: Sequence[int]) -> list[int]:
        horizon = min((len(t.cumulative) for t in self.traces), default=0)
        return [c for c in sorted(checkpoints) if 1 <= c <= horizon]

    def to_markdown_table(self, checkpoints: Sequence[int]) -> str:
        """Algorithms x checkpoints, mean cumulative regret to 2 decimals."""
        reached = self.reached_checkpoints(checkpoints)
        table = self.summary(reached)
        lines = []
        header = "| Algorithm | " + " | ".join(f"T={c}" for c in reached) + " |"
        lines.append(header if reached else "| Algorithm |")
        lines.append("|-----------|" + "".join("--------|" for _ in reached))
        for algo in self.algorithms:
            cells = " | ".join(f"{table[algo][c]:.2f}" for c in reached)
            lines.append(f"| {algo} | {cells} |" if reached else f"| {algo} |")
        return "\n".join(lines) + "\n"

    def to_markdown_summary(
        self,
        checkpoints: Sequence[int],
        optimal: float,
        optimal_set: Sequence[int],
        zeta: float,
        fingerprint: str,
        seeds: Sequence[int],
    ) -> str:
        lines = [
            "# Cumulative zeta-regret",
            "",
            f"- optimal probing set: {list(optimal_set)}",
            f"- R(S*): {optimal:.6f}",
            f"- zeta: {zeta!r}",
            f"- seeds: {list(seeds)}",
            f"- config fingerprint: {fingerprint}",
            "",
            self.to_markdown_table(checkpoints),
        ]
        return "\n".join(lines)
