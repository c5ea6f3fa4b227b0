# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Instability experiment: perturb a solitary wave, evolve it and follow its distance to the orbit
# of the unperturbed wave.
import dataclasses
import logging
import math
import os
from typing import Dict, List, Optional, Sequence

import numpy as np

from .distance import best_shift, fit_speed
from .errors import ConfigError, EvolutionAborted
from .evolution import CFL, SEAM_TOL, EvolutionState, conserved, periodize
from .model import ModelSpec, WaveParameters, model_label
from .profile import Profile, ProfileOptions, reconstruct_profile
from .scheduler import EvolutionScheduler
from .utils import is_power_of_two, replace_example_docstring, write_csv, write_json

EXAMPLE_DOC_STRING = """
    Examples:
        ```py
        >>> from ekwaves import ModelSpec, WaveParameters, ExperimentConfig, Perturbation, InstabilityPipeline
        >>> config = ExperimentConfig(model=ModelSpec.bona_sachs(2), params=WaveParameters(v_star=0.0),
        ...                           L=40, n=1024, T=100, perturbation=Perturbation(amplitude=1e-3))
        >>> result = InstabilityPipeline()(config)
        >>> result.summary['crossing_time']
        ```
"""
# Columns of the diagnostics CSV
DIAGNOSTICS_HEADER = ['t', 'orbital_distance', 'mass', 'momentum', 'hamiltonian']
# Sub directory for the field snapshots
SNAPSHOT_DIR = 'snapshots'


@dataclasses.dataclass(frozen=True)
class Perturbation:
    """ Mean-zero Gaussian bump added to V """
    amplitude: float = 0.0
    # None: L/20
    width: Optional[float] = None
    # None: one width to the right of the wave. A bump centred on the wave keeps the (V even, U odd)
    # symmetry and never excites the unstable (V odd, U even) mode of a standing wave.
    center: Optional[float] = None

    def __call__(self, y, L):
        if self.amplitude == 0:
            return np.zeros_like(y)
        width = self.width or L/20
        center = width if self.center is None else self.center
        bump = self.amplitude*np.exp(-((y - center)/width)**2)
        # Removing the mean keeps the mass of the wave
        return bump - np.mean(bump)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    params: WaveParameters
    L: float = 40.0
    n: int = 1024
    # None: automatic, from the stability rule
    dt: Optional[float] = None
    T: float = 20.0
    perturbation: Perturbation = Perturbation()
    sample_stride: int = 10
    snapshot_times: Sequence[float] = ()
    cfl: float = CFL
    growth_factor: float = 10.0
    distance_floor: float = 1e-4
    stop_on_growth: bool = False
    seam_tol: float = SEAM_TOL
    profile_options: ProfileOptions = ProfileOptions()
    progress: bool = True

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ConfigError(f"n must be a power of two, got {self.n}")
        for name in ('L', 'T', 'cfl', 'growth_factor', 'distance_floor'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.sample_stride < 1:
            raise ConfigError(f"sample_stride must be at least 1, got {self.sample_stride}")

    def describe(self):
        d = {k: getattr(self, k) for k in ('L', 'n', 'dt', 'T', 'sample_stride', 'cfl', 'growth_factor',
                                            'distance_floor')}
        d['model'] = model_label(self.model)
        d['params'] = dataclasses.asdict(self.params)
        d['perturbation'] = dataclasses.asdict(self.perturbation)
        d['snapshot_times'] = list(self.snapshot_times)
        return d


@dataclasses.dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    orbital_distance: float
    mass: float
    momentum: float
    hamiltonian: float
    shift: float = 0.0

    def csv_row(self):
        return [self.t, self.orbital_distance, self.mass, self.momentum, self.hamiltonian]


@dataclasses.dataclass
class ExperimentResult:
    rows: List[DiagnosticsRow]
    summary: Dict
    final_state: EvolutionState
    reference: EvolutionState
    snapshots: List[EvolutionState] = dataclasses.field(default_factory=list)

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, 'diagnostics.csv'), DIAGNOSTICS_HEADER, [r.csv_row() for r in self.rows])
        if self.snapshots:
            snap_dir = os.path.join(out_dir, SNAPSHOT_DIR)
            os.makedirs(snap_dir, exist_ok=True)
            for s in self.snapshots:
                write_csv(os.path.join(snap_dir, f"snapshot_t{s.t:.6f}.csv"), ['y', 'V', 'U'],
                          list(zip(s.y, s.V, s.U)))
        self.final_state.save_checkpoint(os.path.join(out_dir, 'final_state.safetensors'))
        write_json(os.path.join(out_dir, 'summary.json'), self.summary)


def _drift(values, reference):
    """ Largest deviation from the initial value, relative unless that value is zero """
    values = np.asarray(values, dtype=float)
    if not values.size:
        return 0.0
    scale = abs(reference) if abs(reference) > 1e-12 else 1.0
    return float(np.max(np.abs(values - reference))/scale)


class InstabilityPipeline:
    def __init__(self, profile: Optional[Profile] = None):
        # Reuse an already computed profile (it must match the config parameters)
        self.profile = profile

    @classmethod
    def from_profile(cls, profile: Profile):
        return cls(profile)

    @replace_example_docstring(EXAMPLE_DOC_STRING)
    def __call__(self, config: ExperimentConfig) -> 'ExperimentResult':
        r"""
        Runs the experiment.

        Args:
            config (`ExperimentConfig`):
                Model, wave parameters, grid (`L`, `n`), time stepping (`dt`, `T`, `cfl`), perturbation and
                sampling. `growth_factor` and `distance_floor` define the crossing threshold
                growth_factor * max(d0, distance_floor).
        Examples:

        Returns:
            An `ExperimentResult` with the diagnostics rows, the summary, the final state and the snapshots.
            An aborted run (non-finite values or domain escape) is reported in the summary, the final state
            is then the last good one.
        """
        model = config.model
        params = config.params
        logging.info(f"Instability experiment: {model_label(model)}, v*={params.v_star:g}, c={params.c:g}, "
                     f"delta={config.perturbation.amplitude:g}")
        profile = self.profile
        if profile is None:
            profile = reconstruct_profile(model, params, config.profile_options)
        if np.isfinite(profile.decay_rate) and config.L < 20/profile.decay_rate:
            raise ConfigError(f"L={config.L} below 20/decay_rate={20/profile.decay_rate:.6g}")
        reference = periodize(profile, config.L, config.n, config.seam_tol)
        V0 = reference.V + config.perturbation(reference.y, config.L)
        if not model.in_domain(V0):
            raise ConfigError("The perturbation takes V out of the model domain")
        state = dataclasses.replace(reference, V=V0)

        rows: List[DiagnosticsRow] = []
        snapshots: List[EvolutionState] = []
        tracker = {'crossing_time': None, 'threshold': math.nan}

        def diagnostics(i, s):
            sigma, dist = best_shift(s, reference.V, reference.U)
            mass, momentum, ham = conserved(s, model)
            rows.append(DiagnosticsRow(s.t, dist, mass, momentum, ham, sigma))
            if i == 0:
                tracker['threshold'] = config.growth_factor*max(dist, config.distance_floor)
            elif tracker['crossing_time'] is None and dist > tracker['threshold']:
                tracker['crossing_time'] = s.t
                logging.info(f"Distance {dist:.6g} above {tracker['threshold']:.6g} at t={s.t:.6g}")
                return config.stop_on_growth
            logging.debug(f"t={s.t:.6g} distance={dist:.6g} H={ham:.17g}")
            return False

        scheduler = EvolutionScheduler(config.T, config.dt, config.cfl, config.sample_stride,
                                       config.snapshot_times, config.progress)
        aborted = None
        try:
            final = scheduler(state, model, diagnostics, snapshots.append)
        except EvolutionAborted as e:
            logging.error(f"Run aborted: {e}")
            aborted = e
            final = scheduler.last_good
        summary = self.summarize(config, rows, tracker, aborted, final)
        summary['steps'] = scheduler.steps_done
        return ExperimentResult(rows=rows, summary=summary, final_state=final, reference=reference,
                                snapshots=snapshots)

    @staticmethod
    def summarize(config, rows, tracker, aborted, final):
        d = np.array([r.orbital_distance for r in rows]) if rows else np.array([math.nan])
        crossing = tracker['crossing_time']
        mass0, mom0, ham0 = (rows[0].mass, rows[0].momentum, rows[0].hamiltonian) if rows else (0, 0, 0)
        summary = {
            'config': config.describe(),
            'd0': float(d[0]),
            'd_max': float(np.max(d)),
            'threshold': tracker['threshold'],
            'crossing_time': crossing,
            'growth': 'none' if crossing is None else 'detected',
            'aborted': aborted is not None,
            'abort_reason': aborted.reason if aborted is not None else None,
            'last_good_time': aborted.last_good_time if aborted is not None else final.t,
            'final_time': final.t,
            'fitted_speed': fit_speed([r.t for r in rows], [r.shift for r in rows], config.L),
            'mass_drift': _drift([r.mass for r in rows], mass0),
            'momentum_drift': _drift([r.momentum for r in rows], mom0),
            'hamiltonian_drift': _drift([r.hamiltonian for r in rows], ham0),
        }
        logging.info(f"d0={summary['d0']:.6g} d_max={summary['d_max']:.6g} growth: {summary['growth']}"
                     + (f" at t={crossing:.6g}" if crossing is not None else ''))
        return summary


def run_instability_experiment(config: ExperimentConfig, profile: Optional[Profile] = None):
    return InstabilityPipeline(profile)(config)
