# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
import dataclasses
import logging
import math
from typing import Callable, Optional, Sequence

from tqdm import tqdm

from .errors import ConfigError
from .evolution import CFL, EvolutionState, SpectralGrid, stable_dt, step_rk4
from .model import ModelSpec
# Auto time step: recompute kappa_max every this many steps
DT_REFRESH = 100


class EvolutionScheduler:
    """
    Drives step_rk4 from t to T.
    - Fixed dt or automatic (dt from the dispersive CFL rule, refreshed every DT_REFRESH steps).
    - Steps are shortened to land exactly on the snapshot times and on T.
    - `callback(i, state)` runs on the initial state, every `sample_stride` steps and on the final
      state. It can return True to stop the run.
    """
    def __init__(self, T: float, dt: Optional[float] = None, cfl: float = CFL, sample_stride: int = 10,
                 snapshot_times: Sequence[float] = (), progress: bool = True):
        if not T > 0:
            raise ConfigError(f"T must be positive, got {T}")
        if dt is not None and not dt > 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        if sample_stride < 1:
            raise ConfigError(f"sample_stride must be at least 1, got {sample_stride}")
        self.T = float(T)
        self.dt = dt
        self.cfl = cfl
        self.sample_stride = sample_stride
        self.snapshot_times = sorted(float(t) for t in snapshot_times if 0 <= t <= T)
        self.progress = progress
        self.steps_done = 0
        self.last_good: Optional[EvolutionState] = None

    def __call__(self, state: EvolutionState, model: ModelSpec, callback: Optional[Callable] = None,
                 snapshot: Optional[Callable] = None):
        grid = SpectralGrid(state.L, state.n)
        rule = stable_dt(state, model, self.cfl)
        dt = self.dt or rule
        if self.dt is not None and self.dt > rule:
            logging.warning(f"dt={self.dt:.6g} above the stability rule {rule:.6g}")
        logging.info(f"Time stepping to T={self.T:g} with dt={dt:.6g} on n={state.n}, L={state.L:g}")
        snaps = set(self.snapshot_times)
        if snapshot is not None and state.t in snaps:
            snapshot(state)
        events = sorted({t for t in snaps if t > state.t} | {self.T})
        stop = callback(0, state) if callback else False
        self.last_good = state
        i = 0
        with tqdm(total=self.T, disable=not self.progress, unit='t',
                  bar_format='{l_bar}{bar}| {n:.3g}/{total:.3g} [{elapsed}<{remaining}]') as pbar:
            while not stop and events:
                if self.dt is None and i > 0 and i % DT_REFRESH == 0:
                    dt = stable_dt(state, model, self.cfl)
                t0 = state.t
                state = step_rk4(state, model, min(dt, events[0] - t0), grid)
                i += 1
                self.steps_done = i
                if math.isclose(state.t, events[0], rel_tol=0, abs_tol=1e-12*max(1.0, self.T)):
                    state = dataclasses.replace(state, t=events.pop(0))
                    if snapshot is not None and state.t in snaps:
                        snapshot(state)
                self.last_good = state
                pbar.update(state.t - t0)
                if callback and (i % self.sample_stride == 0 or not events):
                    stop = callback(i, state)
        return state
