# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
import csv
import functools
import json
import logging
import os

import numpy as np
# 17 significant digits: enough to read back the same double
FLOAT_FMT = '.17g'


def create_logger(logging_dir=None, level=logging.INFO):
    """
    Create a logger that writes to stdout and, if a directory is given, to a log file.
    """
    handlers = [logging.StreamHandler()]
    if logging_dir is not None:
        os.makedirs(logging_dir, exist_ok=True)
        handlers.append(logging.FileHandler(os.path.join(logging_dir, 'log.txt')))
    logging.basicConfig(
        level=level,
        format='[\033[34m%(asctime)s\033[0m] %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers,
        force=True,
    )
    logger = logging.getLogger(__name__)
    return logger


def fmt(x):
    """ Lossless text for a number, None/NaN as `nan` """
    if x is None:
        return 'nan'
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FMT)
    return str(x)


def write_csv(fname, header, rows):
    with open(fname, 'w', newline='') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    logging.debug(f"Wrote {len(rows)} rows to {fname}")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        # Keep the 17 digits, JSON has no NaN
        x = float(obj)
        return None if not np.isfinite(x) else float(format(x, FLOAT_FMT))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(fname, data):
    with open(fname, 'w') as f:
        json.dump(_json_ready(data), f, indent=2, sort_keys=True)
        f.write('\n')
    logging.debug(f"Wrote {fname}")


def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


@functools.lru_cache(maxsize=None)
def gauss_legendre_rule(n):
    """ Nodes and weights on [-1, 1], read only """
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss_legendre(f, a, b, n, panels):
    """ Same rule on `panels` equal panels, all the nodes evaluated in one call """
    x, w = gauss_legendre_rule(n)
    edges = np.linspace(a, b, panels + 1)
    xm = 0.5*(edges[1:] + edges[:-1])
    xr = 0.5*(edges[1:] - edges[:-1])
    nodes = (xm[:, None] + xr[:, None]*x[None, :]).ravel()
    vals = np.asarray(f(nodes), dtype=float).reshape(panels, n)
    return float(np.sum(xr*np.sum(w[None, :]*vals, axis=1)))


def panel_quadrature(f, a, b, n=32, tol=1e-12, max_panels=40):
    """
    Composite Gauss-Legendre with dyadic panel refinement.
    Stops when two successive estimates differ by less than `tol` or when doubling again would
    exceed `max_panels`.
    Returns (value, error_estimate, panels)
    """
    if a == b:
        return 0.0, 0.0, 0
    panels = 1
    value = composite_gauss_legendre(f, a, b, n, panels)
    err = np.inf
    while 2*panels <= max_panels:
        panels *= 2
        new = composite_gauss_legendre(f, a, b, n, panels)
        err = abs(new - value)
        value = new
        if err < tol:
            break
    return value, err, panels


def richardson_limit(f, x0, h, direction=1):
    """
    One-sided limit of f at x0 from values at x0+direction*h and x0+direction*h/2, assuming an
    error linear in the offset.
    """
    return 2.0*f(x0 + direction*0.5*h) - f(x0 + direction*h)


def replace_example_docstring(example_docstring):
    """ Fills the empty `Examples:` line of the decorated function docstring """
    def decorator(fn):
        if fn.__doc__ is None:
            # python -OO
            return fn
        lines = fn.__doc__.split('\n')
        for i, line in enumerate(lines):
            if line.strip() == 'Examples:':
                lines[i] = example_docstring.rstrip()
                break
        else:
            raise ValueError(f"{fn.__name__} has no empty `Examples:` section in its docstring")
        fn.__doc__ = '\n'.join(lines)
        return fn
    return decorator
