from .model import ModelSpec, WaveParameters, parse_model, potential, pressure_antiderivative_diff
from .profile import (Direction, Profile, ProfileOptions, existence_window, find_turning_point,
                      first_integral_residual, reconstruct_profile, turning_sensitivity)
from .moment import (MomentReport, Tolerances, Verdict, moment, moment_curve, moment_direct, moment_prime,
                     moment_second, moment_second_standing, stability_verdict)
from .evolution import EvolutionState, conserved, periodize, rhs, step_rk4
from .distance import best_shift, orbital_distance
from .scheduler import EvolutionScheduler
from .pipeline import ExperimentConfig, InstabilityPipeline, Perturbation, run_instability_experiment

__version__ = '1.0.0'
