import pytest
from hypothesis import settings

from domsynth.specfile import load_spec
from domsynth import corpus_path

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sbs():
    return load_spec(corpus_path("sbs.spec"))


@pytest.fixture(scope="session")
def xab():
    return load_spec(corpus_path("xab.spec"))


@pytest.fixture(scope="session")
def threecars():
    return load_spec(corpus_path("threecars.spec"))


@pytest.fixture(scope="session")
def trivial():
    return load_spec(corpus_path("trivial.spec"))
