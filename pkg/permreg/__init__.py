"""permreg: permutation recovery in permuted linear regression."""

from .config import ExperimentConfig
from .experiment import TrialBatch, run_distortion_experiment, run_phase_transition

__all__ = ["ExperimentConfig", "TrialBatch", "run_distortion_experiment", "run_phase_transition"]
