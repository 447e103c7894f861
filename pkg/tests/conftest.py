import pathlib

import pytest

from realvalidate.poly import parse_system

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def load_system(name):
    return parse_system((FIXTURES / name).read_text())


@pytest.fixture
def bivar():
    return load_system("bivar.sys")


@pytest.fixture
def cubic():
    return load_system("cubic.sys")


@pytest.fixture
def posdim():
    return load_system("posdim.sys")


@pytest.fixture
def seiler():
    return load_system("seiler.sys")


@pytest.fixture
def katsura():
    return load_system("katsura.sys")


@pytest.fixture
def phi4():
    return load_system("phi4.sys")
