# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Thermodynamic/capillary models: pressure p(v), capillarity kappa(v) and the effective potential
#   F(v, c) = -f(v) + f(v*) - p(v*)(v - v*) + c^2 (v - v*)^2 / 2,   -f'(v) = p(v)
# We always evaluate F in the factored form F = (v - v*)^2 (Phi(v) + c^2/2), Phi being the reduced
# potential. It has the same value, but it doesn't lose digits near the double root at v*.
import dataclasses
import enum
import functools
import logging
import math
import os
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import ModelDomainError, ModelFileError
from .expression import ExpressionParser, derivative, to_text
# Quadrature used for user defined pressures
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
QUAD_MEMO_SIZE = 16384
# Below this |v - v*| (relative to the scale of v*) the reduced potential of a user model uses its
# Taylor expansion instead of a quotient of two tiny numbers
TAYLOR_ZONE = 1e-6


class ModelKind(enum.Enum):
    BONA_SACHS = 'bona-sachs'
    GROSS_PITAEVSKII = 'gross-pitaevskii'
    USER_DEFINED = 'user'


# Built-in families, as listed by the `models` command
CATALOG = {
    'bona-sachs': {
        'p': '-v + v^q',
        'kappa': '1',
        'params': {'q': 'integer, q >= 2'},
        'defaults': {'q': 2},
        'domain': '-inf < v < inf',
        'constraint': 'q>=2',
    },
    'gross-pitaevskii': {
        'p': 'alpha/v^2 - beta/v^3',
        'kappa': '1/(4*v^4)',
        'params': {'alpha': 'real, alpha > 0', 'beta': 'real, beta > 0'},
        'defaults': {'alpha': 1.0, 'beta': 1.0},
        'domain': '0 < v < inf',
        'constraint': 'with α,β>0',
    },
}


@dataclasses.dataclass(frozen=True)
class WaveParameters:
    v_star: float
    u_star: float = 0.0
    c: float = 0.0

    def with_speed(self, c):
        return dataclasses.replace(self, c=float(c))

    def validate(self, model):
        if not model.in_domain(self.v_star):
            raise ModelDomainError(f"Base state v*={self.v_star} outside the model domain {model.domain}")


@dataclasses.dataclass(frozen=True)
class PotentialValues:
    F: float
    F_v: float
    F_c: float


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    params: Dict[str, float]
    p_text: str
    kappa_text: str
    domain: Tuple[float, float] = (-math.inf, math.inf)
    # Numeric implementation, vectorized over v
    _p: Callable = dataclasses.field(default=None, repr=False, compare=False)
    _dp: Callable = dataclasses.field(default=None, repr=False, compare=False)
    _d2p: Callable = dataclasses.field(default=None, repr=False, compare=False)
    _kappa: Callable = dataclasses.field(default=None, repr=False, compare=False)
    _dkappa: Callable = dataclasses.field(default=None, repr=False, compare=False)

    def __post_init__(self):
        # Per instance memo for the quadratures of user models. lru_cache is thread safe, at worst
        # two readers compute the same panel.
        object.__setattr__(self, '_excess_memo', functools.lru_cache(maxsize=QUAD_MEMO_SIZE)(self._excess_scalar))

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def bona_sachs(cls, q=2):
        if int(q) != q or q < 2:
            raise ModelFileError(f"Bona-Sachs needs an integer q >= 2, got {q}")
        q = int(q)
        return cls(kind=ModelKind.BONA_SACHS, params={'q': q}, p_text=f'-v + v^{q}', kappa_text='1',
                   _p=lambda v: -v + v**q,
                   _dp=lambda v: -1.0 + q*v**(q - 1),
                   _d2p=lambda v: q*(q - 1)*v**(q - 2) + np.zeros_like(v),
                   _kappa=lambda v: np.ones_like(v),
                   _dkappa=lambda v: np.zeros_like(v))

    @classmethod
    def gross_pitaevskii(cls, alpha=1.0, beta=1.0):
        if not (alpha > 0 and beta > 0):
            raise ModelFileError(f"Gross-Pitaevskii needs alpha, beta > 0, got alpha={alpha} beta={beta}")
        a = float(alpha)
        b = float(beta)
        return cls(kind=ModelKind.GROSS_PITAEVSKII, params={'alpha': a, 'beta': b},
                   p_text=f'{a:g}/v^2 - {b:g}/v^3', kappa_text='1/(4*v^4)', domain=(0.0, math.inf),
                   _p=lambda v: a/v**2 - b/v**3,
                   _dp=lambda v: -2*a/v**3 + 3*b/v**4,
                   _d2p=lambda v: 6*a/v**4 - 12*b/v**5,
                   _kappa=lambda v: 0.25/v**4,
                   _dkappa=lambda v: -1.0/v**5)

    @classmethod
    def from_expressions(cls, p_text, kappa_text, params=None, domain=None):
        parser = ExpressionParser(params)
        p_expr = parser(p_text)
        k_expr = parser(kappa_text)
        dp_expr = derivative(p_expr)
        d2p_expr = derivative(dp_expr)
        dk_expr = derivative(k_expr)
        logging.debug(f"p'(v) = {to_text(dp_expr)}, kappa'(v) = {to_text(dk_expr)}")
        lo, hi = domain if domain is not None else (-math.inf, math.inf)
        if not lo < hi:
            raise ModelFileError(f"Empty model domain ({lo}, {hi})")
        return cls(kind=ModelKind.USER_DEFINED, params=dict(parser.params), p_text=p_text.strip(),
                   kappa_text=kappa_text.strip(), domain=(float(lo), float(hi)),
                   _p=parser.lower(p_expr), _dp=parser.lower(dp_expr), _d2p=parser.lower(d2p_expr),
                   _kappa=parser.lower(k_expr), _dkappa=parser.lower(dk_expr))

    @classmethod
    def from_file(cls, fname):
        """ Key/value model file: `p = ...`, `kappa = ...`, `params.<name> = <number>`, `domain = lo, hi` """
        if not os.path.isfile(fname):
            raise ModelFileError(f"Missing model file `{fname}`")
        values = {}
        params = {}
        domain = None
        with open(fname) as f:
            for n, line in enumerate(f, 1):
                line = line.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ModelFileError(f"{fname}:{n}: expected `key = value`")
                key, value = (x.strip() for x in line.split('=', 1))
                if key in ('p', 'kappa'):
                    values[key] = value
                elif key.startswith('params.'):
                    params[key[7:]] = _to_number(value, fname, n)
                elif key == 'domain':
                    lims = value.split(',')
                    if len(lims) != 2:
                        raise ModelFileError(f"{fname}:{n}: domain needs two limits")
                    domain = tuple(_to_number(x, fname, n) for x in lims)
                else:
                    raise ModelFileError(f"{fname}:{n}: unknown key `{key}`")
        for key in ('p', 'kappa'):
            if key not in values:
                raise ModelFileError(f"{fname}: missing `{key} = <expr>`")
        logging.info(f"Loading model from {fname}")
        return cls.from_expressions(values['p'], values['kappa'], params, domain)

    @classmethod
    def from_selector(cls, selector):
        """ `bona-sachs:q=2`, `gross-pitaevskii:alpha=1,beta=1` or the name of a model file """
        name, _, args = selector.partition(':')
        name = name.strip().lower()
        if name not in CATALOG:
            if os.path.exists(selector):
                return cls.from_file(selector)
            raise ModelFileError(f"Unknown model `{selector}` (not a built-in, not a file)")
        kw = dict(CATALOG[name]['defaults'])
        for item in filter(None, (x.strip() for x in args.split(','))):
            key, eq, value = item.partition('=')
            key = key.strip()
            if not eq or key not in kw:
                raise ModelFileError(f"Bad parameter `{item}` for {name}, valid: {', '.join(kw)}")
            kw[key] = _to_number(value, selector, 0)
        if name == 'bona-sachs':
            return cls.bona_sachs(**kw)
        return cls.gross_pitaevskii(**kw)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    def describe(self):
        return {'kind': self.kind.value, 'p': self.p_text, 'kappa': self.kappa_text, 'params': dict(self.params),
                'domain': list(self.domain)}

    def in_domain(self, v):
        v = np.asarray(v, dtype=float)
        return bool(np.all((v > self.domain[0]) & (v < self.domain[1])))

    def check_domain(self, v):
        if not self.in_domain(v):
            v = np.asarray(v, dtype=float)
            raise ModelDomainError(f"v in [{np.min(v):g}, {np.max(v):g}] leaves the model domain {self.domain}")

    def p(self, v):
        self.check_domain(v)
        return self._p(np.asarray(v, dtype=float))

    def dp(self, v):
        self.check_domain(v)
        return self._dp(np.asarray(v, dtype=float))

    def d2p(self, v):
        self.check_domain(v)
        return self._d2p(np.asarray(v, dtype=float))

    def kappa(self, v):
        self.check_domain(v)
        k = self._kappa(np.asarray(v, dtype=float))
        if not np.all(np.isfinite(k) & (k > 0)):
            raise ModelDomainError(f"kappa(v) must be positive, got min {np.min(k):g} for {self.kappa_text}")
        return k

    def dkappa(self, v):
        self.check_domain(v)
        return self._dkappa(np.asarray(v, dtype=float))

    # ------------------------------------------------------------------
    # Integrals of the pressure
    # ------------------------------------------------------------------
    def _excess_scalar(self, v_ref, v):
        """ int_{v_ref}^{v} (p(s) - p(v_ref)) ds for user models """
        p_ref = float(self._p(np.asarray(v_ref)))
        val, err = integrate.quad(lambda s: float(self._p(np.asarray(s))) - p_ref, v_ref, v,
                                  epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        return val

    def excess_integral(self, v, v_ref):
        """ int_{v_ref}^{v} (p(s) - p(v_ref)) ds, vectorized over v """
        v = np.asarray(v, dtype=float)
        self.check_domain(v)
        self.check_domain(v_ref)
        d = v - v_ref
        if self.kind is not ModelKind.USER_DEFINED:
            return d*d*self._reduced_builtin(v, float(v_ref))
        memo = self._excess_memo
        return np.vectorize(lambda x: memo(float(v_ref), float(x)), otypes=[float])(v)

    def reduced_potential(self, v, v_star):
        """ Phi(v) = (int_{v*}^{v} p - p(v*)(v - v*)) / (v - v*)^2, Phi(v*) = p'(v*)/2 """
        v = np.asarray(v, dtype=float)
        self.check_domain(v)
        self.check_domain(v_star)
        if self.kind is not ModelKind.USER_DEFINED:
            return self._reduced_builtin(v, float(v_star))
        d = v - v_star
        near = np.abs(d) <= TAYLOR_ZONE*max(1.0, abs(v_star))
        taylor = 0.5*float(self._dp(np.asarray(v_star))) + float(self._d2p(np.asarray(v_star)))*d/6.0
        safe_d = np.where(near, 1.0, d)
        quot = self.excess_integral(np.where(near, v_star, v), v_star)/(safe_d*safe_d)
        return np.where(near, taylor, quot)

    def _reduced_builtin(self, v, vs):
        if self.kind is ModelKind.BONA_SACHS:
            # int s^q - vs^q (v-vs) = (v-vs)^2 sum_{j=1}^{q} vs^{q-j} h_{j-1}(v, vs) / (q+1)
            # h_m being the complete homogeneous polynomial of degree m
            q = self.params['q']
            h = np.ones_like(v)
            acc = vs**(q - 1)*h
            for j in range(2, q + 1):
                h = v*h + vs**(j - 1)
                acc = acc + vs**(q - j)*h
            return -0.5 + acc/(q + 1)
        a = self.params['alpha']
        b = self.params['beta']
        return -a/(v*vs**2) + b*(2*v + vs)/(2*v**2*vs**3)


def _to_number(text, where, line):
    try:
        return float(text)
    except ValueError:
        raise ModelFileError(f"{where}:{line}: `{text.strip()}` isn't a number") from None


def parse_model(p_text, kappa_text, params=None, domain=None):
    """ User model from the expressions of p and kappa """
    return ModelSpec.from_expressions(p_text, kappa_text, params, domain)


def pressure_antiderivative_diff(model, v, v_ref):
    """ -f(v) + f(v_ref) = int_{v_ref}^{v} p(s) ds """
    v = np.asarray(v, dtype=float)
    model.check_domain(v)
    model.check_domain(v_ref)
    if model.kind is ModelKind.BONA_SACHS:
        q = model.params['q']
        return (v**(q + 1) - v_ref**(q + 1))/(q + 1) - 0.5*(v**2 - v_ref**2)
    if model.kind is ModelKind.GROSS_PITAEVSKII:
        a = model.params['alpha']
        b = model.params['beta']
        return a*(1.0/v_ref - 1.0/v) - 0.5*b*(1.0/v_ref**2 - 1.0/v**2)
    return model.excess_integral(v, v_ref) + float(model.p(v_ref))*(v - v_ref)


def potential(model, params, v):
    """ F, dF/dv and dF/dc at v """
    v = np.asarray(v, dtype=float)
    vs = params.v_star
    c = params.c
    d = v - vs
    F = d*d*(model.reduced_potential(v, vs) + 0.5*c*c)
    F_v = model.p(v) - model.p(vs) + c*c*d
    F_c = c*d*d
    if v.ndim == 0:
        return PotentialValues(float(F), float(F_v), float(F_c))
    return PotentialValues(F, F_v, F_c)


def builtin_models():
    """ Stable listing of the built-in families """
    return [dict(name=name, **{k: v for k, v in CATALOG[name].items() if k != 'defaults'})
            for name in sorted(CATALOG)]


def model_label(model: Optional[ModelSpec]):
    if model is None:
        return 'none'
    if model.kind is ModelKind.USER_DEFINED:
        return f"user(p={model.p_text}, kappa={model.kappa_text})"
    return model.kind.value + ':' + ','.join(f'{k}={v:g}' for k, v in model.params.items())
