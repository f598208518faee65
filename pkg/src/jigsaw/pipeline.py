"""End-to-end simulated experiment: baseline run, global run, CPMs, reconstruction, scoring."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .metrics import MaxCutInstance, MetricReport, evaluate
from .noise_sim import (IdealSpec, NoiseProfile, best_qubit_assignment, identity_assignment,
                        ideal_distribution, sample_counts)
from .pmf import Marginal, SparsePmf, from_counts
from .reconstruction import (DEFAULT_CONFIG, LayerSet, ReconstructionConfig,
                             bayesian_reconstruction, reconstruct_multilayer)
from .subsetting import SubsetPlan, TrialBudget, split_trials

# spawn-key roles, so each stream depends only on (seed, role, subset)
_BASELINE, _GLOBAL, _CPM = 0, 1, 2


def _rng(seed, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("JIGSAW_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class PipelineResult:
    ideal: SparsePmf
    correct: set
    baseline_counts: dict[str, int]
    global_counts: dict[str, int]
    marginal_counts: list[tuple[tuple[int, ...], dict[str, int]]]
    reconstructed: SparsePmf
    baseline: MetricReport
    report: MetricReport
    history: list = field(default_factory=list)

    @property
    def pst_ratio(self) -> float:
        return self.report.pst / self.baseline.pst if self.baseline.pst > 0 else float("inf")


def simulate_cpms(ideal: SparsePmf, profile: NoiseProfile, budget: TrialBudget, seed,
                  threads: int | None = None) -> list[tuple[tuple[int, ...], dict[str, int]]]:
    """Counts for every CPM in ``budget``, each measured on its best channels."""
    def one(item):
        qubits, trials = item
        assignment = best_qubit_assignment(profile, len(qubits), qubits)
        counts = sample_counts(ideal, profile, assignment, qubits, trials, _rng(seed, _CPM, *qubits))
        return qubits, counts

    items = [(qs, t) for qs, t in budget.per_cpm.items() if t > 0]
    threads = thread_count() if threads is None else threads
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def run_pipeline(spec: IdealSpec, profile: NoiseProfile, plan: SubsetPlan,
                 budget: TrialBudget | None = None, cfg: ReconstructionConfig = DEFAULT_CONFIG,
                 seed=0, graph: MaxCutInstance | None = None,
                 global_assignment: dict[int, int] | None = None) -> PipelineResult:
    """Simulate baseline and JigSaw runs of ``spec`` on ``profile`` and score both.

    The baseline spends every trial in global mode.  JigSaw spends
    ``budget.global_trials`` there and the rest on the plan's CPMs, each
    remapped onto the lowest-error channels.  Plans with several subset sizes
    are reconstructed layer by layer, largest first.
    """
    n = spec.width
    if plan.width != n:
        raise ValueError(f"plan width {plan.width} != program width {n}")
    if budget is None:
        budget = split_trials(65536, plan)
    ideal = ideal_distribution(spec)
    correct = spec.correct_outcomes()
    assignment = global_assignment or identity_assignment(n)
    everything = list(range(n - 1, -1, -1))  # highest qubit leftmost

    baseline_counts = sample_counts(ideal, profile, assignment, everything, budget.total_trials,
                                    _rng(seed, _BASELINE))
    global_counts = sample_counts(ideal, profile, assignment, everything, budget.global_trials,
                                  _rng(seed, _GLOBAL))
    marginal_counts = simulate_cpms(ideal, profile, budget, seed)

    global_pmf = from_counts(global_counts, n)
    marginals = [Marginal(qs, from_counts(c, len(qs))) for qs, c in marginal_counts]
    history: list = []
    if len({m.width for m in marginals}) > 1:
        out = reconstruct_multilayer(global_pmf, LayerSet.from_marginals(marginals), cfg, history)
    else:
        out = bayesian_reconstruction(global_pmf, marginals, cfg, history)

    return PipelineResult(
        ideal=ideal,
        correct=correct,
        baseline_counts=baseline_counts,
        global_counts=global_counts,
        marginal_counts=marginal_counts,
        reconstructed=out,
        baseline=evaluate(from_counts(baseline_counts, n), ideal, correct, graph),
        report=evaluate(out, ideal, correct, graph),
        history=history,
    )
