import pytest

from weldlab import maps as mp


@pytest.fixture(scope="session")
def identity_pair():
    return mp.catalog("identity")


@pytest.fixture(scope="session")
def ellipse01():
    return mp.catalog("ellipse", c=0.1)


@pytest.fixture(scope="session")
def ellipse03():
    return mp.catalog("ellipse", c=0.3)


@pytest.fixture(scope="session")
def ellipse05():
    return mp.catalog("ellipse", c=0.5)


@pytest.fixture(scope="session")
def bump_pair():
    return mp.catalog("fourier_bump", eps=0.05, k=2)


@pytest.fixture(scope="session")
def octagon():
    from weldlab import fuchsian as fx
    return fx.octagon_group()
