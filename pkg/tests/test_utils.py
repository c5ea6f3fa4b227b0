import json
import math

import numpy as np
import pytest

from ekwaves.utils import (fmt, is_power_of_two, panel_quadrature, replace_example_docstring, richardson_limit,
                           write_json)


def test_panel_quadrature():
    value, err, panels = panel_quadrature(np.exp, 0.0, 1.0)
    assert value == pytest.approx(math.e - 1, rel=1e-14)
    assert err < 1e-12
    assert panels == 2
    # sqrt(x) is not smooth at 0, the refinement stops at max_panels
    value, err, panels = panel_quadrature(np.sqrt, 0.0, 1.0, n=8, max_panels=16)
    assert panels == 16
    assert value == pytest.approx(2/3, abs=1e-4)
    assert err > 1e-12
    assert panel_quadrature(np.exp, 1.0, 1.0) == (0.0, 0.0, 0)


def test_richardson_limit():
    # (e^x - 1)/x at 0: the samples are off by h/2, the extrapolation by h^2/12
    f = lambda x: math.expm1(x)/x
    assert abs(f(1e-3) - 1) > 4e-4
    assert abs(richardson_limit(f, 0.0, 1e-3) - 1) < 1e-7
    assert richardson_limit(lambda x: 3 + 2*x, 1.0, 0.1, -1) == pytest.approx(5.0, rel=1e-14)


def test_fmt():
    assert fmt(0.1) == '0.10000000000000001'
    assert float(fmt(1/3)) == 1/3
    assert fmt(None) == 'nan'
    assert fmt(np.int64(3)) == '3'
    assert fmt(np.True_) == 'True'
    assert fmt('ok') == 'ok'


def test_write_json(tmp_path):
    fname = str(tmp_path/'data.json')
    write_json(fname, {'x': np.float64(0.5), 'n': np.int32(4), 'missing': math.nan, 'list': (1.0, math.inf)})
    with open(fname) as f:
        assert json.load(f) == {'x': 0.5, 'n': 4, 'missing': None, 'list': [1.0, None]}


@pytest.mark.parametrize('n, expected', [(1, True), (64, True), (0, False), (96, False), (1000, False)])
def test_is_power_of_two(n, expected):
    assert is_power_of_two(n) is expected


def test_replace_example_docstring():
    @replace_example_docstring("    Examples:\n        >>> f()\n")
    def f():
        """
        Does nothing.

        Examples:

        Returns:
            None
        """
    assert '>>> f()' in f.__doc__
    assert f.__doc__.index('>>> f()') < f.__doc__.index('Returns:')

    def g():
        """ No examples """
    with pytest.raises(ValueError):
        replace_example_docstring("x")(g)
