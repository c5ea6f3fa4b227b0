# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Solitary wave profiles: turning point, existence window and the homoclinic orbit of
#   kappa(v) v'' + kappa'(v) v'^2 / 2 = -F_v(v, c)
# obtained from the first integral  kappa(v) v'^2 / 2 + F(v, c) = 0.
#
# The half profile is parametrized as v = v* + sigma D sech^2(s), s >= 0, D = |v_m - v*|.
# Then dxi/ds = 2 tanh(s) sqrt(kappa/psi), psi = -2 F/(v - v*)^2, which is smooth and bounded away
# from 0 at both ends: no singular integrals and a natural grading toward v_m and v*.
import dataclasses
import enum
import logging
import math
from typing import Optional

import numpy as np
from scipy import interpolate, optimize

from .errors import (ConfigError, ModelDomainError, NoSolitaryWave, NoSubsonicWindow, QuadratureError,
                     SonicDegenerate)
from .model import ModelSpec, WaveParameters, potential
from .utils import gauss_legendre_rule, write_csv
# Bracket search
FIRST_OFFSET = 1e-3
MAX_HALVINGS = 20
MAX_EXPANSIONS = 60
SIGN_SAMPLES = 256
SONIC_TOL = 1e-10
# Curve construction
GAUSS_NODES = 8
NEWTON_ITERS = 2
# Below this parameter value dxi/ds is replaced by its limit at the turning point
S_LIMIT = 1e-4


class Direction(enum.Enum):
    ELEVATION = 'elevation'
    DEPRESSION = 'depression'

    @property
    def sign(self):
        return 1.0 if self is Direction.ELEVATION else -1.0


@dataclasses.dataclass(frozen=True)
class TurningPoint:
    v_m: float
    direction: Direction
    F_v_at_vm: float
    v_m_prime: float
    # Set when the other side of v* also has a turning point
    ambiguous: bool = False
    alternative: Optional['TurningPoint'] = None


@dataclasses.dataclass(frozen=True)
class ProfileOptions:
    points: int = 4097
    # Half width of the xi grid, None: max(40/decay_rate, 1.25 xi_cut)
    half_width: Optional[float] = None
    # Relative amplitude where the linear tail takes over
    tail_cut: float = 1e-10
    s_step: float = 0.02
    prefer: Optional[Direction] = None
    tol_root: float = 1e-12

    def __post_init__(self):
        if self.points < 3:
            raise ConfigError(f"At least 3 profile points, got {self.points}")
        if not 0 < self.tail_cut < 1:
            raise ConfigError(f"tail_cut must be in (0, 1), got {self.tail_cut}")
        if self.half_width is not None and not self.half_width > 0:
            raise ConfigError(f"half_width must be positive, got {self.half_width}")


def existence_window(model: ModelSpec, v_star):
    """ Subsonic speeds: c^2 < -p'(v*) """
    if not model.in_domain(v_star):
        raise ModelDomainError(f"v*={v_star} outside the model domain {model.domain}")
    dp = float(model.dp(v_star))
    if dp >= 0:
        raise NoSubsonicWindow(f"p'(v*) = {dp:.6g} >= 0 at v*={v_star}: no subsonic speeds")
    s = math.sqrt(-dp)
    return (-s, s)


def decay_rate(model: ModelSpec, params: WaveParameters):
    """ Exponential rate of approach to v*, from the linearization at the base state """
    a = float(model.dp(params.v_star)) + params.c**2
    return math.sqrt(-a/float(model.kappa(params.v_star)))


class WaveGeometry:
    """
    Quantities shared by the profile and the moments of one wave: orientation, amplitude and the
    positive factor psi = -2 F/(v - v*)^2 of the potential
    """
    def __init__(self, model: ModelSpec, params: WaveParameters, turning: TurningPoint):
        self.model = model
        self.params = params
        self.turning = turning
        self.sigma = turning.direction.sign
        self.D = abs(turning.v_m - params.v_star)
        # Residual of the reduced potential at the root, removed so psi(v_m) == 0
        self.g_m = self._g(turning.v_m)

    def _g(self, v):
        return self.model.reduced_potential(v, self.params.v_star) + 0.5*self.params.c**2

    def psi(self, v):
        return -2.0*(self._g(v) - self.g_m)

    def v_from_w(self, w):
        """ w^2 = |v_m - v| """
        return self.turning.v_m - self.sigma*w*w

    def clip(self, v):
        """ Keep v inside the closed wave interval """
        lo, hi = sorted((self.turning.v_m, self.params.v_star))
        return np.clip(v, lo, hi)


def _scan_side(model, params, sign, tol_root):
    """ Turning point on one side of v*, None if F stays negative up to the domain boundary """
    vs = params.v_star
    c2 = params.c**2

    def g(v):
        return float(model.reduced_potential(v, vs)) + 0.5*c2

    boundary = model.domain[1] if sign > 0 else model.domain[0]
    delta = FIRST_OFFSET*max(1.0, abs(vs))
    for _ in range(MAX_HALVINGS):
        if model.in_domain(vs + sign*delta) and np.isfinite(g(vs + sign*delta)):
            break
        delta *= 0.5
    else:
        logging.debug(f"No room on the {'right' if sign > 0 else 'left'} of v*={vs}")
        return None
    lo = vs
    hi = vs + sign*delta
    for _ in range(MAX_EXPANSIONS):
        val = g(hi)
        if not np.isfinite(val):
            return None
        if val >= 0:
            break
        lo = hi
        delta *= 2
        hi = vs + sign*delta
        if not model.in_domain(hi):
            # Walk to the boundary by midpoints
            if not np.isfinite(boundary):
                return None
            hi = 0.5*(lo + boundary)
            if hi == lo:
                return None
    else:
        return None
    # F < 0 must hold all the way from v* to the root: bracket the first crossing
    x = np.linspace(vs, hi, SIGN_SAMPLES + 2)[1:]
    vals = np.asarray(model.reduced_potential(x, vs)) + 0.5*c2
    first = int(np.argmax(vals >= 0)) if np.any(vals >= 0) else len(x) - 1
    a = x[first - 1] if first > 0 else vs
    lo, hi = sorted((a, x[first]))
    root = optimize.brentq(g, lo, hi, xtol=1e-15*max(1.0, abs(vs)), rtol=max(tol_root, 4*np.finfo(float).eps))
    # One Newton step with the exact slope: dg/dv = (F_v - 2 d g)/d^2
    d = root - vs
    slope = (float(model.p(root) - model.p(vs)) + c2*d - 2*d*g(root))/(d*d)
    if slope != 0:
        polished = root - g(root)/slope
        if lo <= polished <= hi and abs(g(polished)) <= abs(g(root)):
            root = polished
    return root


def _make_turning(model, params, v_m):
    pot = potential(model, params, v_m)
    scale = max(1.0, abs(float(model.p(v_m))), abs(float(model.p(params.v_star))))
    if abs(pot.F_v) < SONIC_TOL*scale:
        raise SonicDegenerate(f"F_v(v_m={v_m:.17g}) = {pot.F_v:.3g}: v_m isn't a simple zero of F")
    direction = Direction.ELEVATION if v_m > params.v_star else Direction.DEPRESSION
    assert pot.F_v*direction.sign > 0, f"F_v(v_m) has the wrong sign for a {direction.value} wave"
    v_m_prime = 0.0 if params.c == 0 else -pot.F_c/pot.F_v
    return TurningPoint(v_m=v_m, direction=direction, F_v_at_vm=pot.F_v, v_m_prime=v_m_prime)


def find_turning_point(model: ModelSpec, params: WaveParameters, prefer: Optional[Direction] = None,
                       tol_root: float = 1e-12):
    """
    Nearest simple zero of F(., c) on either side of v*. If both sides have one the result is marked
    `ambiguous` and the other one is in `alternative`. `prefer` selects a side, otherwise the closest
    to v* (elevation on ties) wins.
    """
    params.validate(model)
    window = existence_window(model, params.v_star)
    a = float(model.dp(params.v_star)) + params.c**2
    if abs(a) < SONIC_TOL:
        raise SonicDegenerate(f"F_vv(v*) = p'(v*) + c^2 = {a:.3g}: sonic speed c={params.c}")
    if a > 0:
        raise NoSolitaryWave(f"c={params.c} outside the subsonic window ({window[0]:.6g}, {window[1]:.6g})")

    found = {}
    for direction in Direction:
        root = _scan_side(model, params, direction.sign, tol_root)
        if root is not None:
            found[direction] = _make_turning(model, params, root)
    if not found:
        raise NoSolitaryWave(f"F(., c={params.c}) has no zero next to v*={params.v_star}")
    if len(found) == 1:
        tp = next(iter(found.values()))
    else:
        elev = found[Direction.ELEVATION]
        depr = found[Direction.DEPRESSION]
        if prefer is None:
            # Ties, up to the root tolerance, go to the elevation wave
            up = abs(elev.v_m - params.v_star)
            down = abs(depr.v_m - params.v_star)
            prefer = Direction.ELEVATION if up <= down*(1 + 4*tol_root) else Direction.DEPRESSION
        other = depr if prefer is Direction.ELEVATION else elev
        tp = dataclasses.replace(found[prefer], ambiguous=True, alternative=other)
        logging.info(f"Turning points on both sides of v*: using {prefer.value}, other at v_m={other.v_m:.12g}")
    if prefer is not None and tp.direction is not prefer:
        logging.warning(f"No {prefer.value} wave, using the {tp.direction.value} one")
    logging.debug(f"Turning point v_m={tp.v_m:.17g} ({tp.direction.value}), v_m'={tp.v_m_prime:.12g}")
    return tp


def turning_sensitivity(model: ModelSpec, params: WaveParameters, prefer: Optional[Direction] = None):
    """ dv_m/dc = -F_c(v_m)/F_v(v_m) """
    return find_turning_point(model, params, prefer).v_m_prime


class ProfileCurve:
    """ xi(s) for the half profile, evaluated to round-off at any xi >= 0 """
    def __init__(self, geom: WaveGeometry, tail_cut=1e-10, s_step=0.02):
        self.geom = geom
        model = geom.model
        vm = geom.turning.v_m
        self.kappa_m = float(model.kappa(vm))
        # dxi/ds at s = 0
        self.g0 = math.sqrt(2*self.kappa_m*geom.D/abs(geom.turning.F_v_at_vm))
        self.s_max = math.acosh(1/math.sqrt(tail_cut))
        panels = max(1, int(math.ceil(self.s_max/s_step)))
        self.s_nodes = np.linspace(0.0, self.s_max, panels + 1)
        x, w = gauss_legendre_rule(GAUSS_NODES)
        a = self.s_nodes[:-1, None]
        h = np.diff(self.s_nodes)[:, None]
        t = a + 0.5*h*(x[None, :] + 1)
        inc = 0.5*h[:, 0]*np.sum(w[None, :]*self.dxi_ds(t), axis=1)
        if not np.all(np.isfinite(inc)):
            raise QuadratureError("Non finite arc length while building the profile")
        self.xi_nodes = np.concatenate([[0.0], np.cumsum(inc)])
        self.xi_cut = float(self.xi_nodes[-1])
        self._inverse = interpolate.CubicHermiteSpline(self.xi_nodes, self.s_nodes, 1/self.dxi_ds(self.s_nodes))

    def v_of_s(self, s):
        g = self.geom
        return g.params.v_star + g.sigma*g.D/np.cosh(s)**2

    def dxi_ds(self, s):
        s = np.asarray(s, dtype=float)
        near = s < S_LIMIT
        v = self.geom.clip(self.v_of_s(np.where(near, 1.0, s)))
        psi = self.geom.psi(v)
        kappa = self.geom.model.kappa(v)
        with np.errstate(divide='ignore', invalid='ignore'):
            val = 2*np.tanh(s)*np.sqrt(kappa/psi)
        return np.where(near | ~(psi > 0), self.g0, val)

    def xi_of_s(self, s):
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.s_nodes, s, side='right') - 1, 0, len(self.s_nodes) - 2)
        a = self.s_nodes[k]
        x, w = gauss_legendre_rule(GAUSS_NODES)
        h = s - a
        t = a[..., None] + 0.5*h[..., None]*(x + 1)
        return self.xi_nodes[k] + 0.5*h*np.sum(w*self.dxi_ds(t), axis=-1)

    def s_of_xi(self, xi):
        xi = np.clip(np.asarray(xi, dtype=float), 0.0, self.xi_cut)
        s = np.clip(self._inverse(xi), 0.0, self.s_max)
        for _ in range(NEWTON_ITERS):
            s = np.clip(s - (self.xi_of_s(s) - xi)/self.dxi_ds(s), 0.0, self.s_max)
        return s

    def evaluate(self, xi):
        """ (v, v') at xi >= 0 inside the core, xi <= xi_cut """
        g = self.geom
        s = self.s_of_xi(xi)
        sech2 = 1/np.cosh(s)**2
        v = g.params.v_star + g.sigma*g.D*sech2
        v_prime = -2*g.sigma*g.D*sech2*np.tanh(s)/self.dxi_ds(s)
        return v, v_prime


@dataclasses.dataclass(frozen=True, eq=False)
class Profile:
    xi: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    u: np.ndarray
    decay_rate: float
    params: WaveParameters
    first_integral_residual: float
    turning: Optional[TurningPoint] = None
    # Start of the exponential tail, inf for the constant state
    xi_cut: float = math.inf
    curve: Optional[ProfileCurve] = dataclasses.field(default=None, repr=False, compare=False)
    tail_amplitude: float = 0.0

    @classmethod
    def constant(cls, model: ModelSpec, params: WaveParameters, half_width=40.0, points=4097):
        """ The trivial solution v = v*, u = u* """
        params.validate(model)
        xi = np.linspace(-half_width, half_width, points)
        try:
            rate = decay_rate(model, params)
        except ValueError:
            rate = math.nan
        return cls(xi=xi, v=np.full_like(xi, params.v_star), v_prime=np.zeros_like(xi),
                   u=np.full_like(xi, params.u_star), decay_rate=rate, params=params, first_integral_residual=0.0)

    @property
    def is_trivial(self):
        return self.turning is None

    @property
    def v_m(self):
        return self.params.v_star if self.turning is None else self.turning.v_m

    def sample(self, xi):
        """ (v, v', u) at arbitrary positions, using the curve in the core and the tail outside """
        xi = np.asarray(xi, dtype=float)
        p = self.params
        if self.curve is None:
            return np.full_like(xi, p.v_star), np.zeros_like(xi), np.full_like(xi, p.u_star)
        a = np.abs(xi)
        core = a <= self.xi_cut
        v_core, vp_core = self.curve.evaluate(np.where(core, a, 0.0))
        sigma = self.turning.direction.sign
        tail = sigma*self.tail_amplitude*np.exp(-self.decay_rate*a)
        v = np.where(core, v_core, p.v_star + tail)
        vp = np.where(core, vp_core, -self.decay_rate*tail)
        # v is even, v' odd
        vp = np.where(xi < 0, -vp, vp)
        v = np.where(xi == 0, self.turning.v_m, v)
        u = p.u_star - p.c*(v - p.v_star)
        return v, vp, u

    def export_csv(self, fname):
        write_csv(fname, ['xi', 'v', 'v_prime', 'u'], list(zip(self.xi, self.v, self.v_prime, self.u)))


def reconstruct_profile(model: ModelSpec, params: WaveParameters, options: Optional[ProfileOptions] = None):
    options = options or ProfileOptions()
    turning = find_turning_point(model, params, options.prefer, options.tol_root)
    geom = WaveGeometry(model, params, turning)
    rate = decay_rate(model, params)
    curve = ProfileCurve(geom, options.tail_cut, options.s_step)
    # Tail matched in value at xi_cut
    tail_amplitude = geom.D*options.tail_cut*math.exp(rate*curve.xi_cut)
    half_width = options.half_width or max(40.0/rate, 1.25*curve.xi_cut)
    xi = np.linspace(-half_width, half_width, options.points)
    profile = Profile(xi=xi, v=None, v_prime=None, u=None, decay_rate=rate, params=params,
                      first_integral_residual=math.nan, turning=turning, xi_cut=curve.xi_cut, curve=curve,
                      tail_amplitude=tail_amplitude)
    v, v_prime, u = profile.sample(xi)
    profile = dataclasses.replace(profile, v=v, v_prime=v_prime, u=u)
    residual = first_integral_residual(profile, model)
    profile = dataclasses.replace(profile, first_integral_residual=residual)
    logging.info(f"Profile: v_m={turning.v_m:.12g} ({turning.direction.value}), decay rate={rate:.12g}, "
                 f"xi_cut={curve.xi_cut:.6g}, first integral residual={residual:.3g}")
    return profile


def first_integral_residual(profile: Profile, model: ModelSpec):
    """ max |kappa(v) v'^2/2 + F(v, c)| over the grid, tail excluded """
    keep = np.abs(profile.xi) <= profile.xi_cut
    if not np.any(keep):
        return 0.0
    v = profile.v[keep]
    vp = profile.v_prime[keep]
    F = potential(model, profile.params, v).F
    return float(np.max(np.abs(0.5*model.kappa(v)*vp*vp + F)))
