import math
import os

import numpy as np
import pytest

from conftest import MODELS_DIR
from ekwaves.errors import ModelDomainError, ModelFileError, UnknownIdentifier
from ekwaves.model import (ModelKind, ModelSpec, WaveParameters, builtin_models, model_label, parse_model, potential,
                           pressure_antiderivative_diff)


def test_antiderivative_examples(bs2, gp):
    assert pressure_antiderivative_diff(bs2, 1.0, 0.0) == pytest.approx(-1/6, rel=1e-15)
    assert pressure_antiderivative_diff(gp, 1.0, 2.0) == pytest.approx(-1/8, rel=1e-15)


def test_antiderivative_user_model():
    user = parse_model('-v + v^2', '1')
    assert float(pressure_antiderivative_diff(user, 1.0, 0.0)) == pytest.approx(-1/6, abs=1e-12)
    user = parse_model('1/v^2 - 1/v^3', '1/(4*v^4)', domain=(0, math.inf))
    assert float(pressure_antiderivative_diff(user, 1.0, 2.0)) == pytest.approx(-1/8, abs=1e-12)


def test_potential_example(bs2, standing):
    pot = potential(bs2, standing, 1.0)
    assert pot.F == pytest.approx(-1/6, rel=1e-15)
    assert pot.F_v == 0
    assert pot.F_c == 0


def test_gross_pitaevskii_potential(gp):
    # F(v, 0) = -(v - 1)(v - 2)^2/(8 v^2) at v* = 2
    v = np.linspace(0.5, 4, 15)
    F = potential(gp, WaveParameters(v_star=2.0), v).F
    np.testing.assert_allclose(F, -(v - 1)*(v - 2)**2/(8*v**2), rtol=1e-13, atol=1e-16)


@pytest.mark.parametrize('kind', ['bs2', 'bs3', 'gp', 'user'])
@pytest.mark.parametrize('c', [0.0, 0.3])
def test_derivatives_by_finite_differences(kind, c):
    model, vs, v = {
        'bs2': (ModelSpec.bona_sachs(2), 0.0, np.array([-0.7, 0.4, 1.2])),
        'bs3': (ModelSpec.bona_sachs(3), 0.2, np.array([-0.9, 0.5, 1.1])),
        'gp': (ModelSpec.gross_pitaevskii(1, 1), 2.0, np.array([0.8, 1.5, 3.0])),
        'user': (ModelSpec.from_file(os.path.join(MODELS_DIR, 'quadratic_capillarity.model')), 0.0,
                 np.array([-0.5, 0.6, 1.3])),
    }[kind]
    params = WaveParameters(v_star=vs, c=c)
    h = 1e-4
    pot = potential(model, params, v)
    fd_v = (potential(model, params, v + h).F - potential(model, params, v - h).F)/(2*h)
    np.testing.assert_allclose(pot.F_v, fd_v, rtol=1e-6, atol=1e-8)
    fd_c = (potential(model, params.with_speed(c + h), v).F - potential(model, params.with_speed(c - h), v).F)/(2*h)
    np.testing.assert_allclose(pot.F_c, fd_c, rtol=1e-6, atol=1e-8)


def test_even_in_speed(bs2, gp):
    v = np.linspace(0.6, 1.8, 7)
    for model, vs in ((bs2, 0.0), (gp, 2.0)):
        plus = potential(model, WaveParameters(v_star=vs, c=0.2), v)
        minus = potential(model, WaveParameters(v_star=vs, c=-0.2), v)
        np.testing.assert_array_equal(plus.F, minus.F)
        np.testing.assert_array_equal(plus.F_v, minus.F_v)
        np.testing.assert_array_equal(plus.F_c, -minus.F_c)


def test_F_c_vanishes_at_rest(gp):
    pot = potential(gp, WaveParameters(v_star=2.0), np.linspace(0.5, 3, 9))
    assert np.all(pot.F_c == 0)


@pytest.mark.parametrize('fname, builtin, vs', [
    ('bona_sachs_q3.model', ModelSpec.bona_sachs(3), 0.0),
    ('gross_pitaevskii.model', ModelSpec.gross_pitaevskii(1, 1), 2.0),
])
def test_model_file_matches_builtin(fname, builtin, vs):
    user = ModelSpec.from_file(os.path.join(MODELS_DIR, fname))
    assert user.kind is ModelKind.USER_DEFINED
    v = np.array([vs - 0.9, vs - 0.3, vs, vs + 0.4, vs + 1.0])
    params = WaveParameters(v_star=vs, c=0.1)
    np.testing.assert_allclose(potential(user, params, v).F, potential(builtin, params, v).F, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(user.kappa(v), builtin.kappa(v), rtol=1e-15)
    np.testing.assert_allclose(user.dkappa(v), builtin.dkappa(v), rtol=1e-15)


def test_model_file_syntax(model_file):
    fname = model_file("""
# comment line
p = -v + v^q   # trailing comment
kappa = 1 + v^2/a
params.q = 2
params.a = 4
domain = -10, 10
""")
    model = ModelSpec.from_file(fname)
    assert model.params == {'q': 2.0, 'a': 4.0}
    assert model.domain == (-10.0, 10.0)
    assert float(model.kappa(2.0)) == pytest.approx(2.0)
    assert float(model.dkappa(2.0)) == pytest.approx(1.0)


@pytest.mark.parametrize('text', [
    'kappa = 1\n',
    'p = -v + v^2\n',
    'p = -v + v^2\nkappa = 1\ncolor = 3\n',
    'p = -v + v^2\nkappa = 1\nthis line is wrong\n',
    'p = -v + v^2\nkappa = 1\nparams.a = four\n',
    'p = -v + v^2\nkappa = 1\ndomain = 1\n',
    'p = -v + v^2\nkappa = 1\ndomain = 2, 1\n',
])
def test_bad_model_file(model_file, text):
    with pytest.raises(ModelFileError):
        ModelSpec.from_file(model_file(text))


def test_unknown_identifier_in_file(model_file):
    with pytest.raises(UnknownIdentifier):
        ModelSpec.from_file(model_file('p = -v + v^q\nkappa = 1\n'))


def test_missing_model_file(tmp_path):
    with pytest.raises(ModelFileError):
        ModelSpec.from_file(str(tmp_path/'missing.model'))


def test_selectors():
    assert ModelSpec.from_selector('bona-sachs:q=3').params == {'q': 3}
    assert ModelSpec.from_selector('bona-sachs').params == {'q': 2}
    gp = ModelSpec.from_selector('gross-pitaevskii:alpha=2')
    assert gp.params == {'alpha': 2.0, 'beta': 1.0}
    assert model_label(gp) == 'gross-pitaevskii:alpha=2,beta=1'
    user = ModelSpec.from_selector(os.path.join(MODELS_DIR, 'quadratic_capillarity.model'))
    assert user.kind is ModelKind.USER_DEFINED


@pytest.mark.parametrize('selector', ['bona-sachs:r=2', 'bona-sachs:q=1.5', 'bona-sachs:q=1', 'bona-sachs:q',
                                      'gross-pitaevskii:alpha=-1', 'no-such-model'])
def test_bad_selectors(selector):
    with pytest.raises(ModelFileError):
        ModelSpec.from_selector(selector)


def test_domain(gp):
    assert gp.in_domain(1.0)
    assert not gp.in_domain(np.array([1.0, -1.0]))
    with pytest.raises(ModelDomainError):
        gp.p(0.0)
    with pytest.raises(ModelDomainError):
        WaveParameters(v_star=-1.0).validate(gp)


def test_kappa_must_be_positive():
    model = parse_model('-v + v^2', '1 - v')
    assert float(model.kappa(0.5)) == pytest.approx(0.5)
    with pytest.raises(ModelDomainError):
        model.kappa(np.array([0.0, 2.0]))


def test_catalog():
    listing = builtin_models()
    assert [m['name'] for m in listing] == ['bona-sachs', 'gross-pitaevskii']
    assert listing == builtin_models()
    assert listing[1]['constraint'] == 'with α,β>0'


@pytest.mark.parametrize('builtin, v', [
    (ModelSpec.bona_sachs(2), np.linspace(-2, 2, 9)),
    (ModelSpec.bona_sachs(5), np.linspace(-2, 2, 9)),
    (ModelSpec.gross_pitaevskii(1, 1), np.linspace(0.25, 4, 9)),
])
def test_printed_formula_matches_builtin(builtin, v):
    user = parse_model(builtin.p_text, builtin.kappa_text, domain=builtin.domain)
    for name in ('p', 'dp', 'd2p', 'kappa', 'dkappa'):
        np.testing.assert_allclose(getattr(user, name)(v), getattr(builtin, name)(v), rtol=1e-14, atol=1e-14)
