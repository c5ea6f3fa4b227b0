import os

import pytest

from ekwaves.model import ModelSpec, WaveParameters

MODELS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'models')


@pytest.fixture(scope='session')
def bs2():
    return ModelSpec.bona_sachs(2)


@pytest.fixture(scope='session')
def gp():
    return ModelSpec.gross_pitaevskii(1.0, 1.0)


@pytest.fixture(scope='session')
def standing():
    return WaveParameters(v_star=0.0)


@pytest.fixture
def model_file(tmp_path):
    """ Writes a model file and returns its name """
    def write(text, name='test.model'):
        fname = tmp_path/name
        fname.write_text(text)
        return str(fname)
    return write
