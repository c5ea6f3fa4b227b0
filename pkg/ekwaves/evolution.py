# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Euler-Korteweg system on a periodic interval [-L, L)
#   V_t = U_y
#   U_t = -(p(V) + kappa(V) V_yy + kappa'(V) V_y^2 / 2)_y
# Fourier pseudo-spectral in space, classical RK4 in time.
import dataclasses
import logging
import math
from typing import Optional

import numpy as np
from safetensors import safe_open
from safetensors.numpy import save_file

from .errors import ConfigError, EvolutionAborted, ModelDomainError, SeamMismatchError
from .model import ModelSpec, pressure_antiderivative_diff
from .profile import Profile
from .utils import FLOAT_FMT, is_power_of_two
# Default CFL constant in dt = C dy^2 / (pi^2 sqrt(kappa_max))
CFL = 0.5
SEAM_TOL = 1e-8


class SpectralGrid:
    def __init__(self, L, n):
        if not is_power_of_two(n):
            raise ConfigError(f"The grid size must be a power of two, got {n}")
        if not L > 0:
            raise ConfigError(f"L must be positive, got {L}")
        self.L = float(L)
        self.n = int(n)
        self.dy = 2*self.L/self.n
        self.y = -self.L + self.dy*np.arange(self.n)
        self.k = 2*np.pi*np.fft.rfftfreq(self.n, d=self.dy)
        # First derivative: the Nyquist mode has no odd partner
        self.ik = 1j*self.k
        self.ik[-1] = 0
        self.k2 = -self.k**2
        # 2/3 rule for the nonlinear part of the flux
        self.dealias = np.arange(self.k.size) < (2*(self.n//2))//3 + 1

    def derivative(self, f):
        return np.fft.irfft(self.ik*np.fft.rfft(f), self.n)

    def integrate(self, f):
        # Trapezoidal rule, spectrally exact for periodic fields
        return float(np.sum(f)*self.dy)


@dataclasses.dataclass(frozen=True, eq=False)
class EvolutionState:
    y: np.ndarray
    V: np.ndarray
    U: np.ndarray
    t: float = 0.0
    v_star: float = 0.0
    u_star: float = 0.0

    @property
    def n(self):
        return self.y.size

    @property
    def L(self):
        return -float(self.y[0])

    @property
    def grid(self):
        return SpectralGrid(self.L, self.n)

    def save_checkpoint(self, fname):
        meta = {k: format(float(getattr(self, k)), FLOAT_FMT) for k in ('t', 'v_star', 'u_star', 'L')}
        save_file({'y': np.ascontiguousarray(self.y), 'V': np.ascontiguousarray(self.V),
                   'U': np.ascontiguousarray(self.U)}, fname, metadata=meta)
        logging.info(f"Saved state at t={self.t:.6g} to {fname}")

    @classmethod
    def from_checkpoint(cls, fname):
        with safe_open(fname, framework='np') as f:
            meta = f.metadata() or {}
            fields = {k: f.get_tensor(k) for k in ('y', 'V', 'U')}
        missing = {'t', 'v_star', 'u_star'} - set(meta)
        if missing:
            raise ConfigError(f"{fname}: checkpoint without {', '.join(sorted(missing))}")
        return cls(t=float(meta['t']), v_star=float(meta['v_star']), u_star=float(meta['u_star']), **fields)


def periodize(profile: Profile, L, n, tol=SEAM_TOL):
    """ Profile sampled on the periodic grid of [-L, L) """
    grid = SpectralGrid(L, n)
    p = profile.params
    v, v_prime, u = profile.sample(grid.y)
    if not profile.is_trivial:
        # The periodic extension is continuous, the truncation shows in the distance to the base
        # state and in the jump of v' at the seam
        amplitude = abs(profile.v_m - p.v_star)
        v_end, vp_end, _ = profile.sample(np.array([grid.L]))
        mismatch = max(abs(v_end[0] - p.v_star), abs(2*vp_end[0])/profile.decay_rate)/amplitude
        if mismatch > tol:
            raise SeamMismatchError(f"Seam mismatch {mismatch:.3g} > {tol:.3g}: L={L} too small for decay rate "
                                    f"{profile.decay_rate:.6g}")
        logging.debug(f"Seam mismatch {mismatch:.3g}")
    return EvolutionState(y=grid.y, V=v, U=u, t=0.0, v_star=p.v_star, u_star=p.u_star)


def rhs(state: EvolutionState, model: ModelSpec, grid: Optional[SpectralGrid] = None):
    """
    (V_t, U_t). The linearization about the mean of V is applied exactly in Fourier space, only the
    nonlinear rest of the flux is dealiased, so the stiff dispersive part keeps its true spectrum.
    """
    grid = grid or state.grid
    V = state.V
    model.check_domain(V)
    Vh = np.fft.rfft(V)
    Uh = np.fft.rfft(state.U)
    Vy = np.fft.irfft(grid.ik*Vh, grid.n)
    Vyy = np.fft.irfft(grid.k2*Vh, grid.n)
    v_mean = float(np.mean(V))
    dp0 = float(model.dp(v_mean))
    k0 = float(model.kappa(v_mean))
    flux = model.p(V) + model.kappa(V)*Vyy + 0.5*model.dkappa(V)*Vy*Vy
    rest = flux - dp0*(V - v_mean) - k0*Vyy
    flux_h = dp0*Vh + k0*grid.k2*Vh + grid.dealias*np.fft.rfft(rest)
    flux_h[0] = 0
    V_t = np.fft.irfft(grid.ik*Uh, grid.n)
    U_t = np.fft.irfft(-grid.ik*flux_h, grid.n)
    return V_t, U_t


def step_rk4(state: EvolutionState, model: ModelSpec, dt, grid: Optional[SpectralGrid] = None):
    grid = grid or state.grid

    def checked(V, U):
        if not (np.all(np.isfinite(V)) and np.all(np.isfinite(U))):
            raise EvolutionAborted('non-finite values', state.t)
        return dataclasses.replace(state, V=V, U=U)

    def at(dV, dU, h):
        return checked(state.V + h*dV, state.U + h*dU)

    try:
        k1 = rhs(checked(state.V, state.U), model, grid)
        k2 = rhs(at(*k1, 0.5*dt), model, grid)
        k3 = rhs(at(*k2, 0.5*dt), model, grid)
        k4 = rhs(at(*k3, dt), model, grid)
        new = at(k1[0] + 2*k2[0] + 2*k3[0] + k4[0], k1[1] + 2*k2[1] + 2*k3[1] + k4[1], dt/6)
    except ModelDomainError as e:
        raise EvolutionAborted(f'domain escape ({e})', state.t) from None
    if not model.in_domain(new.V):
        raise EvolutionAborted('domain escape', state.t)
    return dataclasses.replace(new, t=state.t + dt)


def stable_dt(state: EvolutionState, model: ModelSpec, cfl=CFL):
    """ dt = C dy^2 / (pi^2 sqrt(kappa_max)), from the dispersion relation omega ~ sqrt(kappa) k^2 """
    kappa_max = float(np.max(model.kappa(state.V)))
    dy = 2*state.L/state.n
    return cfl*dy*dy/(math.pi**2*math.sqrt(kappa_max))


def conserved(state: EvolutionState, model: ModelSpec, grid: Optional[SpectralGrid] = None):
    """ (mass, momentum, hamiltonian) relative to the base state """
    grid = grid or state.grid
    dV = state.V - state.v_star
    dU = state.U - state.u_star
    Vy = grid.derivative(state.V)
    # f(V) - f(v*) = -int_{v*}^{V} p
    energy = 0.5*dU*dU - pressure_antiderivative_diff(model, state.V, state.v_star) + \
        0.5*model.kappa(state.V)*Vy*Vy
    return grid.integrate(dV), grid.integrate(dU), grid.integrate(energy)
