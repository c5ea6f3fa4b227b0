# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Distance to the orbit of a wave under translations
#   inf_sigma ( ||V - v(. + sigma)||_H1^2 + ||U - u(. + sigma)||_L2^2 )^(1/2)
# Norms by Parseval. All the grid shifts are scanned at once by FFT cross-correlation, then the
# shift is refined continuously with Fourier shifts of the reference.
import logging
import math

import numpy as np
from scipy import optimize

from .evolution import EvolutionState
# Polishing steps on the (locally quadratic) squared distance
POLISH_STEPS = 2
POLISH_OFFSET = 1e-4


class ShiftedDistance:
    """ Squared distance between a state and a shifted reference, as a function of the shift """
    def __init__(self, V, U, ref_V, ref_U, L):
        n = V.size
        assert ref_V.size == n and U.size == n and ref_U.size == n, "Reference and state on different grids"
        self.n = n
        self.L = float(L)
        self.dy = 2*self.L/n
        self.k = 2*np.pi*np.fft.fftfreq(n, d=self.dy)
        self.scale = self.dy/n
        self.weight = 1 + self.k**2
        self.Vh, self.Uh = np.fft.fft(V), np.fft.fft(U)
        self.rVh, self.rUh = np.fft.fft(ref_V), np.fft.fft(ref_U)

    def __call__(self, sigma):
        # r(y + sigma) has coefficients r_k exp(i k sigma)
        phase = np.exp(1j*self.k*sigma)
        dV = self.Vh - self.rVh*phase
        dU = self.Uh - self.rUh*phase
        return self.scale*float(np.sum(self.weight*np.abs(dV)**2 + np.abs(dU)**2))

    def on_grid(self):
        """ Squared distance for the shifts j*dy, j = 0 .. n-1 """
        own = np.sum(self.weight*(np.abs(self.Vh)**2 + np.abs(self.rVh)**2) + np.abs(self.Uh)**2 +
                     np.abs(self.rUh)**2)
        cross = self.weight*self.Vh*np.conj(self.rVh) + self.Uh*np.conj(self.rUh)
        return np.maximum(self.scale*(own - 2*np.real(np.fft.fft(cross))), 0.0)


def _polish(f, sigma, value, h):
    """ Vertex of the parabola through three points around sigma """
    for _ in range(POLISH_STEPS):
        fm, fp = f(sigma - h), f(sigma + h)
        curv = fp - 2*value + fm
        if not curv > 0:
            break
        trial = sigma - 0.5*h*(fp - fm)/curv
        ft = f(trial)
        if not ft < value:
            break
        sigma, value = trial, ft
    return sigma, value


def best_shift(state: EvolutionState, ref_V, ref_U, xatol=None):
    """ (sigma, distance): the shift of the reference closest to the state, sigma in (-L, L] """
    L = state.L
    dist2 = ShiftedDistance(state.V, state.U, np.asarray(ref_V), np.asarray(ref_U), L)
    j = int(np.argmin(dist2.on_grid()))
    sigma = j*dist2.dy
    if sigma > L:
        sigma -= 2*L
    value = dist2(sigma)
    res = optimize.minimize_scalar(dist2, bounds=(sigma - dist2.dy, sigma + dist2.dy), method='bounded',
                                   options={'xatol': xatol or 1e-10*L})
    if res.fun < value:
        sigma, value = float(res.x), float(res.fun)
    sigma, value = _polish(dist2, sigma, value, POLISH_OFFSET*dist2.dy)
    logging.debug(f"Best shift {sigma:.12g}, distance {math.sqrt(value):.6g}")
    return sigma, math.sqrt(value)


def orbital_distance(state: EvolutionState, ref_V, ref_U):
    return best_shift(state, ref_V, ref_U)[1]


def fit_speed(times, shifts, L):
    """ Translation speed from the best shifts: the state follows r(y - c t), so sigma = -c t """
    times = np.asarray(times, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    keep = np.isfinite(times) & np.isfinite(shifts)
    if np.count_nonzero(keep) < 2:
        return math.nan
    sigma = np.unwrap(shifts[keep], period=2*L)
    return float(-np.polyfit(times[keep], sigma, 1)[0])
