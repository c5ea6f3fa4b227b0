# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Moment of instability m(c) = int kappa(v) v'^2 dxi and its first two derivatives in c.
# All the integrals run over the wave interval between v* and v_m, written in w = |v_m - v|^(1/2)
# so the square root singularity at the turning point disappears:
#   m   = 4 int sqrt(kappa) |d| sqrt(psi) w dw
#   m'  = -4 c int sqrt(kappa) |d| / sqrt(psi) w dw
#   m'' = 4 int (A + B) / (sqrt(kappa) |d|^3 psi^(3/2)) w dw
# with d = v - v*, -2F = d^2 psi and
#   A = F kappa_v v_m' F_c
#   B = kappa d (2F (d + 2 c v_m') - c d (F_v v_m' + F_c))
import dataclasses
import enum
import logging
import math
from multiprocessing.pool import ThreadPool
from typing import Dict, List, Optional

import numpy as np
from scipy import integrate

from .errors import ConfigError, EKError, NoSolitaryWave, QuadratureError
from .model import ModelSpec, WaveParameters, model_label, potential
from .profile import Direction, Profile, WaveGeometry, find_turning_point
from .utils import panel_quadrature, richardson_limit, write_csv, write_json
# Samples of the m'' integrand kept in the report
INTEGRAND_SAMPLES = 65


class Verdict(enum.Enum):
    UNSTABLE_STANDING = 'UnstableStanding'
    UNSTABLE_NONCONVEX = 'UnstableNonconvex'
    CRITERION_INCONCLUSIVE = 'CriterionInconclusive'


@dataclasses.dataclass(frozen=True)
class Tolerances:
    root: float = 1e-12
    quad: float = 1e-10
    refine: float = 1e-12
    gauss_nodes: int = 32
    max_panels: int = 40
    verdict: float = 1e-8
    endpoint_offset: float = 1e-6
    endpoint_agreement: float = 1e-6

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ConfigError(f"Tolerance `{field.name}` must be positive, got {value}")


@dataclasses.dataclass(frozen=True, eq=False)
class SecondDerivativeIntegrand:
    """ Samples of the m'' integrand: m'' = 2 int combined dw """
    w: np.ndarray
    v: np.ndarray
    A: np.ndarray
    B: np.ndarray
    combined: np.ndarray
    flags: List[str] = dataclasses.field(default_factory=list)


@dataclasses.dataclass
class MomentReport:
    c: float
    v_star: float
    u_star: float = 0.0
    model: str = ''
    m: float = math.nan
    m_prime: float = math.nan
    m_second: float = math.nan
    quadrature_error_estimates: Dict[str, float] = dataclasses.field(default_factory=dict)
    verdict: Optional[Verdict] = None
    status: str = 'ok'
    flags: List[str] = dataclasses.field(default_factory=list)
    v_m: float = math.nan
    direction: Optional[str] = None
    v_m_prime: float = math.nan

    @property
    def ok(self):
        return self.status == 'ok'

    def to_dict(self):
        d = dataclasses.asdict(self)
        d['verdict'] = self.verdict.value if self.verdict is not None else None
        return d

    def csv_row(self):
        return [self.c, self.m, self.m_prime, self.m_second, self.verdict.value if self.verdict else '', self.status]


class _Integrands:
    """ The three moment integrands of one wave, as functions of w """
    def __init__(self, model: ModelSpec, params: WaveParameters, tolerances: Tolerances, prefer=None):
        self.model = model
        self.params = params
        self.tol = tolerances
        self.turning = find_turning_point(model, params, prefer, tolerances.root)
        self.geom = WaveGeometry(model, params, self.turning)
        self.W = math.sqrt(self.geom.D)

    def _common(self, w):
        g = self.geom
        v = g.clip(g.v_from_w(w))
        d = v - self.params.v_star
        psi = np.maximum(g.psi(v), 0.0)
        return v, d, psi, self.model.kappa(v)

    def m(self, w):
        v, d, psi, kappa = self._common(w)
        return 4*np.sqrt(kappa)*np.abs(d)*np.sqrt(psi)*w

    def m_prime(self, w):
        return -self.params.c*self.standing(w)

    def standing(self, w):
        """ 4 int sqrt(kappa) |d| w / sqrt(psi) dw is -m''(0), and m'(c) = -c times it """
        v, d, psi, kappa = self._common(w)
        with np.errstate(divide='ignore', invalid='ignore'):
            return 4*np.sqrt(kappa)*np.abs(d)*w/np.sqrt(psi)

    def second_terms(self, v):
        """ A, B and the combined integrand 2w(A+B)/(sqrt(kappa)(-2F)^(3/2)) at v """
        v = np.asarray(v, dtype=float)
        c = self.params.c
        vmp = self.turning.v_m_prime
        d = v - self.params.v_star
        pot = potential(self.model, self.params, v)
        kappa = self.model.kappa(v)
        A = pot.F*self.model.dkappa(v)*vmp*pot.F_c
        B = kappa*d*(2*pot.F*(d + 2*c*vmp) - c*d*(pot.F_v*vmp + pot.F_c))
        psi = self.geom.psi(v)
        w = np.sqrt(np.abs(self.turning.v_m - v))
        with np.errstate(divide='ignore', invalid='ignore'):
            combined = 2*w*(A + B)/(np.sqrt(kappa)*np.abs(d)**3*psi**1.5)
        return A, B, combined


def _integrate(f, upper, tol: Tolerances, what):
    value, err, panels = panel_quadrature(f, 0.0, upper, tol.gauss_nodes, tol.refine, tol.max_panels)
    if not np.isfinite(value):
        raise QuadratureError(f"Non finite {what} integral")
    if err > tol.quad:
        logging.warning(f"{what}: quadrature error estimate {err:.3g} above {tol.quad:.3g} ({panels} panels)")
    logging.debug(f"{what} = {value:.17g} (err {err:.3g}, {panels} panels)")
    return value, err


def moment(model: ModelSpec, params: WaveParameters, tolerances: Optional[Tolerances] = None, prefer=None):
    tol = tolerances or Tolerances()
    f = _Integrands(model, params, tol, prefer)
    return _integrate(f.m, f.W, tol, 'm')[0]


def moment_prime(model: ModelSpec, params: WaveParameters, tolerances: Optional[Tolerances] = None, prefer=None):
    tol = tolerances or Tolerances()
    f = _Integrands(model, params, tol, prefer)
    if params.c == 0:
        return 0.0
    return _integrate(f.m_prime, f.W, tol, "m'")[0]


def moment_second_standing(model: ModelSpec, v_star, tolerances: Optional[Tolerances] = None, prefer=None):
    """ m''(0): only B survives at c = 0 and the integrand reduces to -sqrt(kappa)|d|/sqrt(psi) """
    tol = tolerances or Tolerances()
    f = _Integrands(model, WaveParameters(v_star=v_star), tol, prefer)
    return -_integrate(f.standing, f.W, tol, "m''(0)")[0]


class _SecondDerivative:
    """ m'' integrand in w with its endpoint limits replaced by one sided Richardson values """
    def __init__(self, f: _Integrands):
        self.f = f
        g = f.geom
        self.h = f.tol.endpoint_offset*g.D
        combined = lambda v: float(f.second_terms(v)[2])
        vm = f.turning.v_m
        vs = f.params.v_star
        # Inward direction at each end
        into_m = -g.sigma
        into_s = g.sigma
        self.limit_m = richardson_limit(combined, vm, self.h, into_m)
        self.limit_s = richardson_limit(combined, vs, self.h, into_s)
        check_m = richardson_limit(combined, vm, 0.5*self.h, into_m)
        check_s = richardson_limit(combined, vs, 0.5*self.h, into_s)
        self.mismatch = max(self._disagreement(self.limit_m, check_m), self._disagreement(self.limit_s, check_s))

    def _disagreement(self, a, b):
        return abs(a - b)/max(abs(a), abs(b), self.f.tol.quad)

    def __call__(self, w):
        g = self.f.geom
        v = g.clip(g.v_from_w(w))
        _, _, combined = self.f.second_terms(v)
        combined = np.where(w*w < self.h, self.limit_m, combined)
        combined = np.where(np.abs(v - self.f.params.v_star) < self.h, self.limit_s, combined)
        # m'' = 2 int combined dw
        return 2*combined

    def samples(self):
        w = np.linspace(0.0, self.f.W, INTEGRAND_SAMPLES)
        v = self.f.geom.clip(self.f.geom.v_from_w(w))
        A, B, combined = self.f.second_terms(v)
        combined = np.where(w*w < self.h, self.limit_m, combined)
        combined = np.where(np.abs(v - self.f.params.v_star) < self.h, self.limit_s, combined)
        return SecondDerivativeIntegrand(w=w, v=v, A=A, B=B, combined=combined)


def _moment_second(f: _Integrands):
    sd = _SecondDerivative(f)
    value, err = _integrate(sd, f.W, f.tol, "m''")
    flags = []
    if sd.mismatch > f.tol.endpoint_agreement:
        logging.warning(f"m'': endpoint extrapolations disagree by {sd.mismatch:.3g} (relative)")
        flags.append('endpoint-mismatch')
    return value, err, sd, flags


def moment_second(model: ModelSpec, params: WaveParameters, tolerances: Optional[Tolerances] = None, prefer=None):
    """ Returns m''(c) and samples of its integrand """
    tol = tolerances or Tolerances()
    f = _Integrands(model, params, tol, prefer)
    value, err, sd, flags = _moment_second(f)
    samples = sd.samples()
    samples.flags.extend(flags)
    return value, samples


def moment_direct(profile: Profile, model: ModelSpec):
    """ int kappa(v) v'^2 dxi on the profile grid, plus the exponential tails beyond the grid """
    if profile.is_trivial:
        return 0.0
    core = integrate.trapezoid(model.kappa(profile.v)*profile.v_prime**2, profile.xi)
    # v - v* = +-a exp(-lambda |xi|) beyond the grid: int kappa v'^2 = kappa(v*) lambda a^2 exp(-2 lambda X)/2
    lam = profile.decay_rate
    kappa_s = float(model.kappa(profile.params.v_star))
    a = np.abs(profile.v[[0, -1]] - profile.params.v_star)
    tails = 0.5*kappa_s*lam*np.sum(a*a)
    return float(core + tails)


def stability_verdict(report: MomentReport, tol=1e-8):
    if report.c == 0:
        if not report.m_second < 0:
            logging.error(f"m''(0) = {report.m_second:.6g} is not negative at a standing wave")
            if 'standing-inconsistent' not in report.flags:
                report.flags.append('standing-inconsistent')
        return Verdict.UNSTABLE_STANDING
    if report.m_second < -tol:
        return Verdict.UNSTABLE_NONCONVEX
    if abs(report.m_second) < tol and 'near-zero' not in report.flags:
        report.flags.append('near-zero')
    return Verdict.CRITERION_INCONCLUSIVE


def analyze_speed(model: ModelSpec, params: WaveParameters, tolerances: Optional[Tolerances] = None,
                  prefer: Optional[Direction] = None):
    """ Full MomentReport at one speed; a missing wave is reported in `status` """
    tol = tolerances or Tolerances()
    report = MomentReport(c=params.c, v_star=params.v_star, u_star=params.u_star, model=model_label(model))
    try:
        f = _Integrands(model, params, tol, prefer)
        report.v_m = f.turning.v_m
        report.direction = f.turning.direction.value
        report.v_m_prime = f.turning.v_m_prime
        if f.turning.ambiguous:
            report.flags.append('ambiguous-direction')
        report.m, err_m = _integrate(f.m, f.W, tol, 'm')
        if params.c == 0:
            report.m_prime, err_p = 0.0, 0.0
        else:
            report.m_prime, err_p = _integrate(f.m_prime, f.W, tol, "m'")
        report.m_second, err_s, _, flags = _moment_second(f)
        report.flags.extend(flags)
        report.quadrature_error_estimates = {'m': err_m, 'm_prime': err_p, 'm_second': err_s}
        if max(err_m, err_p, err_s) > tol.quad:
            report.flags.append('quadrature-tolerance')
    except NoSolitaryWave as e:
        logging.warning(f"c={params.c}: {e}")
        report.status = 'NoSolitaryWave'
        return report
    except EKError as e:
        logging.error(f"c={params.c}: {e}")
        report.status = type(e).__name__
        return report
    assert report.m > 0, f"m={report.m} must be positive for a solitary wave"
    report.verdict = stability_verdict(report, tol.verdict)
    logging.info(f"c={params.c:.6g}: m={report.m:.12g} m'={report.m_prime:.12g} m''={report.m_second:.12g} "
                 f"-> {report.verdict.value}")
    return report


def moment_curve(model: ModelSpec, v_star, speeds, u_star=0.0, tolerances: Optional[Tolerances] = None,
                 prefer: Optional[Direction] = None, workers=1):
    """ One MomentReport per speed, rows are independent and can run in a thread pool """
    base = WaveParameters(v_star=float(v_star), u_star=float(u_star))
    speeds = [float(c) for c in speeds]

    def row(c):
        return analyze_speed(model, base.with_speed(c), tolerances, prefer)

    if workers > 1 and len(speeds) > 1:
        with ThreadPool(min(workers, len(speeds))) as pool:
            reports = pool.map(row, speeds)
    else:
        reports = [row(c) for c in speeds]
    return reports


def export_curve(fname, reports):
    write_csv(fname, ['c', 'm', 'm_prime', 'm_second', 'verdict', 'status'], [r.csv_row() for r in reports])


def export_report(fname, reports, model: Optional[ModelSpec] = None):
    """ One report: the MomentReport object. Several: {"reports": [...]} """
    if len(reports) == 1:
        data = reports[0].to_dict()
    else:
        data = {'reports': [r.to_dict() for r in reports]}
    if model is not None:
        data['model_spec'] = model.describe()
    write_json(fname, data)
