# PUCS core module
# Pure simulation logic - no CLI or I/O beyond the dataset and artifact files

from .models import ActionProfile, DiscreteDistribution, Environment, ProbingCost, ResourcePMF, RoundRealization
from .assignment import f_unprobed, h_prob, h_total, max_weight_matching, optimal_assignment
from .probing import Exact, MonteCarlo, ProbePlan, R_of, exhaustive_optimal_probe, f_prob, f_total, greedy_probe
from .estimators import Estimators, confidence_radius, update_estimates
from .policies import POLICIES, make_policy, olpa_run, run_baseline
from .harness import ZETA, RegretTrace, run_experiment, zeta_regret
from .exports import RegretExporter

__all__ = [
    'ActionProfile',
    'DiscreteDistribution',
    'Environment',
    'ProbingCost',
    'ResourcePMF',
    'RoundRealization',
    'f_unprobed',
    'h_prob',
    'h_total',
    'max_weight_matching',
    'optimal_assignment',
    'Exact',
    'MonteCarlo',
    'ProbePlan',
    'R_of',
    'exhaustive_optimal_probe',
    'f_prob',
    'f_total',
    'greedy_probe',
    'Estimators',
    'confidence_radius',
    'update_estimates',
    'POLICIES',
    'make_policy',
    'olpa_run',
    'run_baseline',
    'ZETA',
    'RegretTrace',
    'run_experiment',
    'zeta_regret',
    'RegretExporter',
]
