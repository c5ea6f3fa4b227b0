import csv
import json
import math
import os
import sys

import numpy as np
import pytest

from conftest import MODELS_DIR
from ekwaves.errors import ConfigError, NoSolitaryWave
from ekwaves.model import ModelSpec, WaveParameters, parse_model
from ekwaves.moment import (MomentReport, Tolerances, Verdict, analyze_speed, export_curve, export_report, moment,
                            moment_curve, moment_direct, moment_prime, moment_second, moment_second_standing,
                            stability_verdict)
from ekwaves.profile import reconstruct_profile

GP_MOMENT = (4 - math.pi)/16
GP_SECOND = -2*(math.pi - 2)


def bs_moment(c):
    return 1.2*(1 - c*c)**2.5


def bs_second(c):
    return math.sqrt(1 - c*c)*(24*c*c - 6)


# Admissible waves for the consistency checks
WAVES = [
    (ModelSpec.bona_sachs(2), 0.0, 0.1),
    (ModelSpec.bona_sachs(2), 0.0, 0.3),
    (ModelSpec.bona_sachs(2), 0.0, 0.7),
    (ModelSpec.bona_sachs(3), 0.0, 0.4),
    (ModelSpec.bona_sachs(4), 0.0, 0.2),
    (ModelSpec.bona_sachs(2), -0.2, 0.5),
    (ModelSpec.gross_pitaevskii(1, 1), 2.0, 0.1),
    (ModelSpec.gross_pitaevskii(1, 1), 2.0, 0.15),
    (ModelSpec.gross_pitaevskii(2, 1), 3.0, 0.15),
    (ModelSpec.from_file(os.path.join(MODELS_DIR, 'quadratic_capillarity.model')), 0.0, 0.3),
]


@pytest.mark.parametrize('c', np.round(np.arange(0, 1, 0.1), 1))
def test_moment_bona_sachs(bs2, c):
    assert moment(bs2, WaveParameters(v_star=0.0, c=c)) == pytest.approx(bs_moment(c), rel=1e-6)


def test_moment_gross_pitaevskii(gp):
    assert moment(gp, WaveParameters(v_star=2.0)) == pytest.approx(GP_MOMENT, abs=1e-8)


def test_moment_user_model_matches_builtin(bs2):
    user = parse_model('-v + v^2', '1')
    params = WaveParameters(v_star=0.0, c=0.4)
    assert moment(user, params) == pytest.approx(moment(bs2, params), rel=1e-10)


def test_moment_even(gp):
    for c in (0.05, 0.15, 0.2):
        plus = moment(gp, WaveParameters(v_star=2.0, c=c))
        minus = moment(gp, WaveParameters(v_star=2.0, c=-c))
        assert plus == pytest.approx(minus, abs=1e-10)


def test_moment_prime(bs2, gp):
    assert moment_prime(bs2, WaveParameters(v_star=0.0)) == 0.0
    assert moment_prime(gp, WaveParameters(v_star=2.0)) == 0.0
    assert moment_prime(bs2, WaveParameters(v_star=0.0, c=0.5)) == pytest.approx(-3*0.75**1.5, rel=1e-8)
    assert moment_prime(bs2, WaveParameters(v_star=0.0, c=0.5)) == pytest.approx(-1.9485572, rel=1e-7)


def test_moment_second(bs2, gp):
    value, samples = moment_second(bs2, WaveParameters(v_star=0.0))
    assert value == pytest.approx(-6, abs=1e-6)
    value, samples = moment_second(bs2, WaveParameters(v_star=0.0, c=0.5))
    assert abs(value) < 1e-5
    value, samples = moment_second(gp, WaveParameters(v_star=2.0))
    assert value == pytest.approx(GP_SECOND, abs=1e-6)


@pytest.mark.parametrize('c', [0.2, 0.3, 0.7, 0.9])
def test_moment_second_closed_form(bs2, c):
    value, _ = moment_second(bs2, WaveParameters(v_star=0.0, c=c))
    assert value == pytest.approx(bs_second(c), rel=1e-6)


def test_moment_second_standing(bs2, gp):
    assert moment_second_standing(bs2, 0.0) == pytest.approx(-6, abs=1e-6)
    assert moment_second_standing(gp, 2.0) == pytest.approx(GP_SECOND, abs=1e-6)
    for model, vs in ((bs2, 0.0), (gp, 2.0)):
        full, _ = moment_second(model, WaveParameters(v_star=vs))
        assert full == pytest.approx(moment_second_standing(model, vs), abs=1e-8)


def test_integrand_samples_at_rest(gp):
    _, samples = moment_second(gp, WaveParameters(v_star=2.0))
    assert np.all(samples.A == 0)
    # B(v, 0) = 2 kappa (v - v*)^2 F(v, 0) < 0 inside the wave
    assert np.all(samples.B[1:-1] < 0)
    assert np.all(np.isfinite(samples.combined))
    assert samples.w[0] == 0
    assert samples.w[-1] == pytest.approx(1.0)


def test_integrand_samples_moving(bs2):
    _, samples = moment_second(bs2, WaveParameters(v_star=0.0, c=0.3))
    assert np.all(np.isfinite(samples.combined))
    assert samples.v[0] == pytest.approx(1.5*0.91)
    # A vanishes for a constant capillarity
    assert np.all(samples.A == 0)


@pytest.mark.parametrize('model, vs, c', WAVES)
def test_moment_prime_finite_differences(model, vs, c):
    h = 1e-4
    params = WaveParameters(v_star=vs, c=c)
    fd = (moment(model, params.with_speed(c + h)) - moment(model, params.with_speed(c - h)))/(2*h)
    assert moment_prime(model, params) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize('model, vs, c', WAVES)
def test_moment_second_finite_differences(model, vs, c):
    h = 1e-3
    params = WaveParameters(v_star=vs, c=c)
    fd = (moment_prime(model, params.with_speed(c + h)) - moment_prime(model, params.with_speed(c - h)))/(2*h)
    value, _ = moment_second(model, params)
    assert abs(value - fd) < 1e-4*max(1.0, abs(value))


@pytest.mark.parametrize('model, vs, c', [
    (ModelSpec.bona_sachs(2), 0.0, 0.0),
    (ModelSpec.bona_sachs(2), 0.0, 0.5),
    (ModelSpec.bona_sachs(3), 0.0, 0.4),
    (ModelSpec.gross_pitaevskii(1, 1), 2.0, 0.0),
    (ModelSpec.gross_pitaevskii(1, 1), 2.0, 0.2),
])
def test_moment_direct(model, vs, c):
    params = WaveParameters(v_star=vs, c=c)
    profile = reconstruct_profile(model, params)
    assert moment_direct(profile, model) == pytest.approx(moment(model, params), rel=1e-6)


@pytest.mark.parametrize('q', [2, 3, 4, 5])
def test_standing_waves_bona_sachs(q):
    model = ModelSpec.bona_sachs(q)
    assert moment_second_standing(model, 0.0) < 0
    report = analyze_speed(model, WaveParameters(v_star=0.0))
    assert report.verdict is Verdict.UNSTABLE_STANDING
    assert 'standing-inconsistent' not in report.flags


@pytest.mark.parametrize('alpha', [0.5, 1.0, 2.0])
@pytest.mark.parametrize('beta', [0.5, 1.0, 2.0])
def test_standing_waves_gross_pitaevskii(alpha, beta):
    model = ModelSpec.gross_pitaevskii(alpha, beta)
    vs = 3*beta/alpha
    assert moment_second_standing(model, vs) < 0
    report = analyze_speed(model, WaveParameters(v_star=vs))
    assert report.verdict is Verdict.UNSTABLE_STANDING
    assert report.direction == 'depression'
    assert report.m > 0


def test_sign_change_near_half(bs2):
    speeds = [0.1, 0.2, 0.3, 0.4, 0.45, 0.55, 0.6, 0.7, 0.8, 0.9]
    reports = moment_curve(bs2, 0.0, speeds)
    signs = np.sign([r.m_second for r in reports])
    assert list(signs) == [-1]*5 + [1]*5
    assert [r.verdict for r in reports] == [Verdict.UNSTABLE_NONCONVEX]*5 + [Verdict.CRITERION_INCONCLUSIVE]*5


def test_moment_curve(bs2):
    speeds = [0, 0.25, 0.5, 0.75]
    reports = moment_curve(bs2, 0.0, speeds)
    assert [r.c for r in reports] == speeds
    for r in reports:
        assert r.ok
        assert r.m == pytest.approx(bs_moment(r.c), rel=1e-6)
        assert r.v_m == pytest.approx(1.5*(1 - r.c**2), rel=1e-12)
        assert r.direction == 'elevation'
        assert set(r.quadrature_error_estimates) == {'m', 'm_prime', 'm_second'}
    assert moment_curve(bs2, 0.0, []) == []


def test_moment_curve_threads(gp):
    speeds = [0.0, 0.05, 0.1, 0.15, 0.2]
    serial = moment_curve(gp, 2.0, speeds)
    parallel = moment_curve(gp, 2.0, speeds, workers=3)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]


def test_moment_curve_threads_raise(gp, monkeypatch):
    def broken(model, params, tolerances=None, prefer=None):
        raise RuntimeError(f"row c={params.c}")

    monkeypatch.setattr(sys.modules['ekwaves.moment'], 'analyze_speed', broken)
    with pytest.raises(RuntimeError, match='row c='):
        moment_curve(gp, 2.0, [0.0, 0.1], workers=2)


def test_no_solitary_wave_row(bs2):
    [report] = moment_curve(bs2, 0.0, [1.5])
    assert report.status == 'NoSolitaryWave'
    assert report.verdict is None
    assert not report.ok
    with pytest.raises(NoSolitaryWave):
        moment(bs2, WaveParameters(v_star=0.0, c=1.5))


@pytest.mark.parametrize('fn', [moment, moment_prime, lambda model, params: moment_second(model, params)[0]])
def test_no_subsonic_window(bs2, fn):
    # p'(1) = 1 > 0: no wave at any speed, not even at rest
    with pytest.raises(NoSolitaryWave):
        fn(bs2, WaveParameters(v_star=1.0))


def test_moment_second_flags(gp):
    value, samples = moment_second(gp, WaveParameters(v_star=2.0, c=0.1), Tolerances(endpoint_agreement=1e-300))
    assert samples.flags == ['endpoint-mismatch']
    report = analyze_speed(gp, WaveParameters(v_star=2.0, c=0.1), Tolerances(endpoint_agreement=1e-300))
    assert 'endpoint-mismatch' in report.flags
    assert report.m_second == value


def test_ambiguous_direction_flag():
    report = analyze_speed(ModelSpec.bona_sachs(3), WaveParameters(v_star=0.0, c=0.2))
    assert 'ambiguous-direction' in report.flags
    assert report.direction == 'elevation'


@pytest.mark.parametrize('c, m_second, verdict', [
    (0.0, -6.0, Verdict.UNSTABLE_STANDING),
    (0.3, bs_second(0.3), Verdict.UNSTABLE_NONCONVEX),
    (0.7, bs_second(0.7), Verdict.CRITERION_INCONCLUSIVE),
])
def test_verdict(c, m_second, verdict):
    report = MomentReport(c=c, v_star=0.0, m=bs_moment(c), m_second=m_second)
    assert stability_verdict(report) is verdict
    assert report.flags == []


def test_verdict_flags():
    report = MomentReport(c=0.0, v_star=0.0, m=1.0, m_second=0.5)
    assert stability_verdict(report) is Verdict.UNSTABLE_STANDING
    assert report.flags == ['standing-inconsistent']
    report = MomentReport(c=0.5, v_star=0.0, m=1.0, m_second=1e-10)
    assert stability_verdict(report) is Verdict.CRITERION_INCONCLUSIVE
    assert report.flags == ['near-zero']


def test_bad_tolerances():
    with pytest.raises(ConfigError):
        Tolerances(quad=0.0)
    with pytest.raises(ConfigError):
        Tolerances(root=-1e-12)


def test_exports(bs2, tmp_path):
    reports = moment_curve(bs2, 0.0, [0.0, 0.3, 1.5])
    export_curve(str(tmp_path/'curve.csv'), reports)
    with open(tmp_path/'curve.csv') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['c', 'm', 'm_prime', 'm_second', 'verdict', 'status']
    assert [r[4] for r in rows[1:]] == ['UnstableStanding', 'UnstableNonconvex', '']
    assert [r[5] for r in rows[1:]] == ['ok', 'ok', 'NoSolitaryWave']

    export_report(str(tmp_path/'all.json'), reports, bs2)
    with open(tmp_path/'all.json') as f:
        data = json.load(f)
    assert len(data['reports']) == 3
    assert data['reports'][2]['m'] is None
    assert data['model_spec']['kind'] == 'bona-sachs'

    export_report(str(tmp_path/'one.json'), reports[:1])
    with open(tmp_path/'one.json') as f:
        data = json.load(f)
    assert data['verdict'] == 'UnstableStanding'
    assert data['m_second'] == pytest.approx(-6, abs=1e-6)
