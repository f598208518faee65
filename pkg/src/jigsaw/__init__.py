"""Readout-error mitigation by Bayesian reconstruction of a global histogram from subset marginals."""

from .errors import DegenerateUpdateError, EmptyInputError, JigsawError, ValidationError
from .metrics import MaxCutInstance, MetricReport, arg, evaluate, fidelity, ist, pst, tvd
from .noise_sim import (IdealSpec, NoiseProfile, bernstein_vazirani, best_qubit_assignment, ghz,
                        ideal_distribution, random_planted, sample_counts, spatial_profile)
from .pipeline import PipelineResult, run_pipeline
from .pmf import Marginal, SparsePmf, from_counts, hellinger, marginalize, reduce
from .reconstruction import (DEFAULT_CONFIG, LayerSet, ReconstructionConfig, bayesian_reconstruction,
                             bayesian_update, reconstruct_multilayer, reconstruction_round)
from .subsetting import (SubsetPlan, TrialBudget, estimate_trials, multilayer_plan, random_plan,
                         sliding_window_plan, split_trials)

__version__ = "0.1.0"
